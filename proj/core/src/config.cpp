#include "storyverb/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <set>

#include <yaml-cpp/yaml.h>

#include "storyverb/errors.hpp"

namespace storyverb {

namespace {

void check_unit(std::vector<ConfigViolation>& out, const char* field, double v) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) out.push_back({field, "must lie in [0, 1]"});
}

void check_temperature(std::vector<ConfigViolation>& out, const char* field, double v) {
    if (!std::isfinite(v) || v < 0.0 || v > 2.0) out.push_back({field, "must lie in [0, 2]"});
}

void check_positive(std::vector<ConfigViolation>& out, const char* field, long long v) {
    if (v < 1) out.push_back({field, "must be a positive integer"});
}

// Field name -> setter from a YAML scalar. Keeps parsing and overriding on
// one table.
using Setter = std::function<void(PipelineConfig&, const YAML::Node&)>;

template <typename T>
Setter setter(T PipelineConfig::*member) {
    return [member](PipelineConfig& cfg, const YAML::Node& n) { cfg.*member = n.as<T>(); };
}

const std::map<std::string, Setter, std::less<>>& pipeline_fields() {
    static const std::map<std::string, Setter, std::less<>> fields = {
        {"flow_threshold", setter(&PipelineConfig::flow_threshold)},
        {"short_video_max_s", setter(&PipelineConfig::short_video_max_s)},
        {"ocr_frame_stride", setter(&PipelineConfig::ocr_frame_stride)},
        {"story_temperature", setter(&PipelineConfig::story_temperature)},
        {"task_temperature", setter(&PipelineConfig::task_temperature)},
        {"max_keyframes", setter(&PipelineConfig::max_keyframes)},
        {"blank_low_luma", setter(&PipelineConfig::blank_low_luma)},
        {"blank_high_luma", setter(&PipelineConfig::blank_high_luma)},
        {"dedup_jaccard", setter(&PipelineConfig::dedup_jaccard)},
        {"prompt_char_budget", setter(&PipelineConfig::prompt_char_budget)},
        {"max_output_chars", setter(&PipelineConfig::max_output_chars)},
        {"rng_seed", setter(&PipelineConfig::rng_seed)},
    };
    return fields;
}

const std::set<std::string, std::less<>>& backend_fields() {
    static const std::set<std::string, std::less<>> fields = {
        "kind", "endpoint", "fixture", "auth_env", "rate_limit_rpm", "timeout_s", "max_attempts", "cache"};
    return fields;
}

const std::set<std::string, std::less<>>& stage_names() {
    static const std::set<std::string, std::less<>> names = {
        std::string(kStageCaptioner), std::string(kStageOcr), std::string(kStageKnowledge),
        std::string(kStageStory), std::string(kStageTask), std::string(kStageFlow)};
    return names;
}

std::vector<std::string> split_dots(std::string_view key) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        auto dot = key.find('.', start);
        parts.emplace_back(key.substr(start, dot == std::string_view::npos ? key.npos : dot - start));
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return parts;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) return base / path;
    return path;
}

BackendDescriptor parse_backend(const std::string& id, const YAML::Node& node,
                                const std::filesystem::path& base,
                                std::vector<ConfigViolation>& violations) {
    BackendDescriptor d;
    d.id = id;
    const std::string prefix = "backends." + id + ".";
    if (!node.IsMap()) {
        violations.push_back({"backends." + id, "must be a mapping"});
        return d;
    }
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        const auto& v = kv.second;
        try {
            if (key == "kind") d.kind = v.as<std::string>();
            else if (key == "endpoint") d.endpoint = v.as<std::string>();
            else if (key == "fixture") d.fixture = resolve(base, v.as<std::string>());
            else if (key == "auth_env") d.auth_env = v.as<std::string>();
            else if (key == "rate_limit_rpm") d.rate_limit_rpm = v.as<double>();
            else if (key == "timeout_s") d.timeout_s = v.as<double>();
            else if (key == "max_attempts") d.max_attempts = v.as<int>();
            else if (key == "cache") d.cache = v.as<bool>();
            else violations.push_back({prefix + key, "unknown field"});
        } catch (const YAML::Exception&) {
            violations.push_back({prefix + key, "wrong type"});
        }
    }
    static const std::set<std::string> kinds = {"mock", "http", "overlap", "native"};
    if (!kinds.count(d.kind)) violations.push_back({prefix + "kind", "must be mock, http, overlap or native"});
    if (d.kind == "http" && d.endpoint.empty()) violations.push_back({prefix + "endpoint", "required for http backends"});
    if (d.kind == "mock" && d.fixture.empty()) violations.push_back({prefix + "fixture", "required for mock backends"});
    if (!std::isfinite(d.rate_limit_rpm) || d.rate_limit_rpm < 0) violations.push_back({prefix + "rate_limit_rpm", "must be >= 0"});
    if (!std::isfinite(d.timeout_s) || d.timeout_s <= 0) violations.push_back({prefix + "timeout_s", "must be > 0"});
    if (d.max_attempts < 1) violations.push_back({prefix + "max_attempts", "must be a positive integer"});
    return d;
}

// Sets root[path...] = value, creating maps on the way.
void set_path(YAML::Node root, const std::vector<std::string>& path, const std::string& value) {
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        YAML::Node child = chain.back()[path[i]];
        if (!child.IsDefined() || child.IsNull() || !child.IsMap()) {
            chain.back()[path[i]] = YAML::Node(YAML::NodeType::Map);
            child = chain.back()[path[i]];
        }
        chain.push_back(child);
    }
    chain.back()[path.back()] = YAML::Load(value);
}

}  // namespace

std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string BackendDescriptor::auth_env_name() const {
    if (!auth_env.empty()) return auth_env;
    std::string name = "STORYVERB_";
    for (char c : id) {
        auto u = static_cast<unsigned char>(c);
        name += std::isalnum(u) ? static_cast<char>(std::toupper(u)) : '_';
    }
    return name + "_KEY";
}

PipelineConfig validate_config(const PipelineConfig& cfg) {
    std::vector<ConfigViolation> v;
    if (!std::isfinite(cfg.flow_threshold) || cfg.flow_threshold < 0)
        v.push_back({"flow_threshold", "must be finite and >= 0"});
    if (!std::isfinite(cfg.short_video_max_s) || cfg.short_video_max_s < 0)
        v.push_back({"short_video_max_s", "must be finite and >= 0"});
    check_positive(v, "ocr_frame_stride", cfg.ocr_frame_stride);
    check_temperature(v, "story_temperature", cfg.story_temperature);
    check_temperature(v, "task_temperature", cfg.task_temperature);
    check_positive(v, "max_keyframes", cfg.max_keyframes);
    check_unit(v, "blank_low_luma", cfg.blank_low_luma);
    check_unit(v, "blank_high_luma", cfg.blank_high_luma);
    if (std::isfinite(cfg.blank_low_luma) && std::isfinite(cfg.blank_high_luma) &&
        !(cfg.blank_low_luma < cfg.blank_high_luma)) {
        v.push_back({"blank_low_luma", "must be below blank_high_luma"});
        v.push_back({"blank_high_luma", "must be above blank_low_luma"});
    }
    check_unit(v, "dedup_jaccard", cfg.dedup_jaccard);
    check_positive(v, "prompt_char_budget", cfg.prompt_char_budget);
    check_positive(v, "max_output_chars", cfg.max_output_chars);
    if (!v.empty()) throw ConfigError(std::move(v));
    return cfg;
}

std::string config_slice(const PipelineConfig& cfg, std::string_view stage) {
    std::string out;
    auto put = [&out](std::string_view k, const std::string& val) {
        out += k;
        out += '=';
        out += val;
        out += '\n';
    };
    auto keyframes = [&] {
        put("blank_high_luma", format_real(cfg.blank_high_luma));
        put("blank_low_luma", format_real(cfg.blank_low_luma));
        put("flow_threshold", format_real(cfg.flow_threshold));
        put("max_keyframes", std::to_string(cfg.max_keyframes));
        put("short_video_max_s", format_real(cfg.short_video_max_s));
    };
    auto prompt = [&] {
        put("dedup_jaccard", format_real(cfg.dedup_jaccard));
        put("prompt_char_budget", std::to_string(cfg.prompt_char_budget));
        put("short_video_max_s", format_real(cfg.short_video_max_s));
    };
    out += "stage=";
    out += stage;
    out += '\n';
    if (stage == "keyframes") {
        keyframes();
    } else if (stage == "ocr_frames") {
        put("ocr_frame_stride", std::to_string(cfg.ocr_frame_stride));
    } else if (stage == "verbalize") {
        keyframes();
        put("ocr_frame_stride", std::to_string(cfg.ocr_frame_stride));
    } else if (stage == "prompt") {
        prompt();
    } else if (stage == "story") {
        prompt();
        put("max_output_chars", std::to_string(cfg.max_output_chars));
        put("story_temperature", format_real(cfg.story_temperature));
    } else if (stage == "tasks") {
        put("max_output_chars", std::to_string(cfg.max_output_chars));
        put("rng_seed", std::to_string(cfg.rng_seed));
        put("task_temperature", format_real(cfg.task_temperature));
    } else {
        throw std::invalid_argument("unknown stage: " + std::string(stage));
    }
    return out;
}

bool is_config_key(std::string_view key) {
    auto parts = split_dots(key);
    if (parts.size() == 1) return parts[0] == "data_dir" || parts[0] == "cache_dir";
    if (parts[0] == "pipeline") return parts.size() == 2 && pipeline_fields().count(parts[1]);
    if (parts[0] == "stages") return parts.size() == 2 && stage_names().count(parts[1]);
    if (parts[0] == "datasets") return parts.size() == 2 && !parts[1].empty();
    if (parts[0] == "backends") return parts.size() == 3 && !parts[1].empty() && backend_fields().count(parts[2]);
    return false;
}

AppConfig load_app_config(const std::optional<std::filesystem::path>& path,
                          const std::vector<ConfigOverride>& overrides) {
    YAML::Node root;
    std::filesystem::path base;
    if (path) {
        try {
            root = YAML::LoadFile(path->string());
        } catch (const YAML::Exception& e) {
            throw ConfigError("config", path->string() + ": " + e.what());
        }
        base = path->parent_path();
    }
    if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError("config", "top level must be a mapping");

    for (const auto& ov : overrides) {
        if (!is_config_key(ov.key)) throw ConfigError(ov.key, "unknown configuration key");
        try {
            set_path(root, split_dots(ov.key), ov.value);
        } catch (const YAML::Exception& e) {
            throw ConfigError(ov.key, e.what());
        }
    }

    AppConfig app;
    std::vector<ConfigViolation> violations;
    for (const auto& kv : root) {
        const auto section = kv.first.as<std::string>();
        const auto& node = kv.second;
        if (section == "pipeline") {
            if (!node.IsMap()) {
                violations.push_back({"pipeline", "must be a mapping"});
                continue;
            }
            for (const auto& f : node) {
                const auto name = f.first.as<std::string>();
                auto it = pipeline_fields().find(name);
                if (it == pipeline_fields().end()) {
                    violations.push_back({"pipeline." + name, "unknown field"});
                    continue;
                }
                try {
                    it->second(app.pipeline, f.second);
                } catch (const YAML::Exception&) {
                    violations.push_back({"pipeline." + name, "wrong type"});
                }
            }
        } else if (section == "backends") {
            for (const auto& b : node) {
                auto id = b.first.as<std::string>();
                app.backends[id] = parse_backend(id, b.second, base, violations);
            }
        } else if (section == "stages") {
            for (const auto& s : node) {
                auto stage = s.first.as<std::string>();
                if (!stage_names().count(stage)) {
                    violations.push_back({"stages." + stage, "unknown stage"});
                    continue;
                }
                app.stages[stage] = s.second.as<std::string>();
            }
        } else if (section == "datasets") {
            for (const auto& d : node) app.datasets[d.first.as<std::string>()] = resolve(base, d.second.as<std::string>());
        } else if (section == "data_dir") {
            app.data_dir = resolve(base, node.as<std::string>());
        } else if (section == "cache_dir") {
            app.cache_dir = resolve(base, node.as<std::string>());
        } else {
            violations.push_back({section, "unknown section"});
        }
    }
    for (const auto& [stage, id] : app.stages) {
        if (!app.backends.count(id)) violations.push_back({"stages." + stage, "backend '" + id + "' is not registered"});
    }
    try {
        validate_config(app.pipeline);
    } catch (const ConfigError& e) {
        for (const auto& v : e.violations()) violations.push_back({"pipeline." + v.field, v.message});
    }
    if (!violations.empty()) throw ConfigError(std::move(violations));
    return app;
}

std::filesystem::path resolve_data_dir(const AppConfig& cfg) {
    if (cfg.data_dir) return *cfg.data_dir;
    if (const char* env = std::getenv("STORYVERB_DATA_DIR"); env && *env) return env;
    std::filesystem::path build(STORYVERB_BUILD_DATA_DIR);
    if (std::filesystem::exists(build)) return build;
    return STORYVERB_INSTALL_DATA_DIR;
}

}  // namespace storyverb
