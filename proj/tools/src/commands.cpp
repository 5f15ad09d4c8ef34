#include "commands.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include <spdlog/spdlog.h>

#include "storyverb/annotations.hpp"
#include "storyverb/artifact_store.hpp"
#include "storyverb/cache_key.hpp"
#include "storyverb/clock.hpp"
#include "storyverb/dataset.hpp"
#include "storyverb/digest.hpp"
#include "storyverb/errors.hpp"
#include "storyverb/llm_gateway.hpp"
#include "storyverb/metrics.hpp"
#include "storyverb/pipeline.hpp"
#include "storyverb/prompt.hpp"
#include "storyverb/retrieval.hpp"
#include "storyverb/run_manifest.hpp"
#include "storyverb/tasks.hpp"
#include "storyverb/text.hpp"
#include "storyverb_cli/cli.hpp"

namespace storyverb::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

AppConfig load_config(const Options& o, std::string_view llm_stage) {
    if (!o.backend.empty() && llm_stage.empty()) {
        throw std::invalid_argument("--backend only applies to the story and tasks verbs");
    }
    auto overrides = o.overrides;
    if (o.seed) overrides.push_back({"pipeline.rng_seed", std::to_string(*o.seed)});
    if (!o.backend.empty()) overrides.push_back({"stages." + std::string(llm_stage), o.backend});
    return load_app_config(o.config, overrides);
}

fs::path require_out(const Options& o) {
    if (!o.out) throw std::invalid_argument("--out is required for " + o.verb);
    return *o.out;
}

DatasetName require_dataset(const Options& o) {
    if (o.dataset.empty()) throw std::invalid_argument("--dataset is required for " + o.verb);
    return dataset_from_string(o.dataset);
}

fs::path dataset_root(const Options& o, const AppConfig& cfg) {
    if (o.data_root) return *o.data_root;
    auto it = cfg.datasets.find(o.dataset);
    if (it == cfg.datasets.end()) {
        throw ConfigError("datasets." + o.dataset, "no dataset root configured; pass --data-root");
    }
    return it->second;
}

DatasetManifest open_dataset(const Options& o, const AppConfig& cfg, const TaskCatalog& catalog) {
    return load_dataset(require_dataset(o), dataset_root(o, cfg), catalog);
}

fs::path cache_dir(const AppConfig& cfg, const fs::path& out) {
    return cfg.cache_dir ? *cfg.cache_dir : out / "cache";
}

std::string stage_backend(const AppConfig& cfg, std::string_view stage) {
    auto it = cfg.stages.find(std::string(stage));
    if (it == cfg.stages.end()) {
        throw ConfigError("stages." + std::string(stage), "no backend configured; set it in the config or pass --backend");
    }
    return it->second;
}

void write_json(const fs::path& path, const json& j) {
    write_file_atomic(path.string(), j.dump(2) + "\n");
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows) {
    std::string text;
    for (const auto& r : rows) text += r.dump() + "\n";
    write_file_atomic(path.string(), text);
}

std::vector<json> read_jsonl(const fs::path& path) {
    std::string text;
    try {
        text = read_file(path.string());
    } catch (const std::runtime_error& e) {
        throw DatasetError(e.what());
    }
    std::vector<json> rows;
    std::size_t line_no = 0;
    for (std::size_t i = 0; i < text.size();) {
        auto nl = text.find('\n', i);
        if (nl == std::string::npos) nl = text.size();
        const auto line = trim(std::string_view(text).substr(i, nl - i));
        i = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        try {
            rows.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
    }
    return rows;
}

std::vector<std::size_t> order_by_id(const DatasetManifest& ds) {
    std::vector<std::size_t> idx(ds.items.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return ds.items[a].video_id < ds.items[b].video_id; });
    return idx;
}

int finish(const RunManifest& manifest, const fs::path& out, const std::string& verb) {
    write_json(out / "manifests" / (verb + ".json"), manifest.to_json());
    const auto failed = manifest.count(StageState::failed);
    if (failed == 0) return kOk;
    spdlog::error("{}: {} of {} videos failed", verb, failed, manifest.size());
    return failed == manifest.size() ? kBackend : kPartial;
}

StageStatus failure(const std::string& video_id, const std::exception& e) {
    spdlog::warn("{}: {}", video_id, e.what());
    return {StageState::failed, e.what()};
}

}  // namespace

// ---- verbalize ----------------------------------------------------------------

int cmd_verbalize(const Options& o, std::ostream&) {
    const auto out = require_out(o);
    const auto cfg = load_config(o, "");
    const auto catalog = TaskCatalog::load(resolve_data_dir(cfg));
    const auto ds = open_dataset(o, cfg, catalog);
    auto backends = BackendSet::from_config(cfg);
    ArtifactStore store(cache_dir(cfg, out));
    const auto slice = verbalize_slice(cfg.pipeline, backends.ids);

    std::vector<StageStatus> status(ds.items.size());
    parallel_for(ds.items.size(), o.jobs, [&](std::size_t i) {
        const auto& v = ds.items[i];
        const auto key = cache_key("verbalize", v.video_id, slice);
        try {
            std::optional<VerbalBundle> bundle;
            try {
                if (auto j = store.load_json(key)) bundle = j->get<VerbalBundle>();
            } catch (const CorruptArtifact& e) {
                spdlog::warn("{}: discarding cached bundle: {}", v.video_id, e.what());
            } catch (const json::exception& e) {
                spdlog::warn("{}: discarding cached bundle: {}", v.video_id, e.what());
            }
            if (bundle) {
                status[i] = {StageState::cached, {}};
            } else {
                bundle = verbalize_video(v, {ds.frames_dir(v.video_id), ds.subtitles(v.video_id)}, cfg.pipeline,
                                         backends);
                store.store_json(key, *bundle);
                status[i] = {StageState::done, {}};
            }
            write_json(out / "bundles" / (v.video_id + ".json"), *bundle);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            status[i] = failure(v.video_id, e);
        }
    });

    RunManifest manifest("verbalize", cfg.pipeline, backends.ids, current_timestamp());
    for (std::size_t i = 0; i < ds.items.size(); ++i) {
        manifest.add_video(ds.items[i].video_id);
        manifest.set_status(ds.items[i].video_id, status[i]);
    }
    return finish(manifest, out, "verbalize");
}

// ---- story --------------------------------------------------------------------

int cmd_story(const Options& o, std::ostream&) {
    const auto out = require_out(o);
    const auto cfg = load_config(o, kStageStory);
    const auto backend_id = stage_backend(cfg, kStageStory);
    const auto data_dir = resolve_data_dir(cfg);
    const auto catalog = TaskCatalog::load(data_dir);
    const auto ds = open_dataset(o, cfg, catalog);
    const auto templates = PromptTemplates::load(data_dir / "prompts" / "story.tmpl");

    SystemClock clock;
    LlmGateway gateway(clock);
    gateway.register_backend(cfg.backends.at(backend_id));
    ArtifactStore store(cache_dir(cfg, out));
    gateway.attach_store(&store);
    const StoryContext ctx{cfg.pipeline, templates, gateway, backend_id};

    std::vector<StageStatus> status(ds.items.size());
    std::vector<std::optional<GeneratedStory>> stories(ds.items.size());
    parallel_for(ds.items.size(), o.jobs, [&](std::size_t i) {
        const auto& v = ds.items[i];
        try {
            const auto bundle_path = out / "bundles" / (v.video_id + ".json");
            if (!fs::exists(bundle_path)) throw StageError("no verbal bundle at " + bundle_path.string() + "; run verbalize first");
            VerbalBundle bundle;
            try {
                bundle = json::parse(read_file(bundle_path.string())).get<VerbalBundle>();
            } catch (const json::exception& e) {
                throw ParseError(bundle_path.string(), 0, e.what());
            }
            const auto prompt = assemble_story_prompt(bundle, v, cfg.pipeline, templates);
            write_file_atomic((out / "prompts" / (v.video_id + ".txt")).string(), prompt.rendered);
            stories[i] = generate_story(bundle, v, ctx);
            status[i] = {StageState::done, {}};
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            status[i] = failure(v.video_id, e);
        }
    });

    std::vector<json> rows;
    for (auto i : order_by_id(ds)) {
        if (stories[i]) rows.push_back(*stories[i]);
    }
    write_jsonl(out / "stories.jsonl", rows);

    RunManifest manifest("story", cfg.pipeline, {{std::string(kStageStory), backend_id}}, current_timestamp());
    for (std::size_t i = 0; i < ds.items.size(); ++i) {
        manifest.add_video(ds.items[i].video_id);
        manifest.set_status(ds.items[i].video_id, status[i]);
    }
    return finish(manifest, out, "story");
}

// ---- tasks --------------------------------------------------------------------

namespace {

std::vector<TaskId> tasks_for(DatasetName name) {
    switch (name) {
        case DatasetName::video_ads:
            return {TaskId::topic,      TaskId::emotion,    TaskId::emotion_clubbed,
                    TaskId::action_retrieval, TaskId::reason_retrieval, TaskId::action_gen,
                    TaskId::reason_gen, TaskId::reason_given_action};
        case DatasetName::persuasion:
            return {TaskId::persuasion};
        case DatasetName::video_story:
            return {};
    }
    return {};
}

std::uint64_t retrieval_seed(std::int64_t rng_seed, const std::string& video_id, TaskId task) {
    return digest_u64(std::to_string(rng_seed) + "\n" + video_id + "\n" + std::string(to_string(task)));
}

}  // namespace

int cmd_tasks(const Options& o, std::ostream&) {
    const auto out = require_out(o);
    const auto cfg = load_config(o, kStageTask);
    const auto backend_id = stage_backend(cfg, kStageTask);
    const auto data_dir = resolve_data_dir(cfg);
    const auto catalog = TaskCatalog::load(data_dir);
    const auto name = require_dataset(o);

    const auto available = tasks_for(name);
    if (available.empty()) throw std::invalid_argument(o.dataset + " has no downstream tasks; evaluate its stories directly");
    std::vector<TaskId> selected = available;
    if (!o.tasks.empty()) {
        selected.clear();
        for (const auto& t : o.tasks) {
            const auto id = task_from_string(t);
            if (std::find(available.begin(), available.end(), id) == available.end()) {
                throw std::invalid_argument("task " + t + " does not apply to " + o.dataset);
            }
            if (std::find(selected.begin(), selected.end(), id) == selected.end()) selected.push_back(id);
        }
        std::sort(selected.begin(), selected.end());
    }

    const auto ds = open_dataset(o, cfg, catalog);
    const auto templates = PromptTemplates::load(data_dir / "prompts" / "task.tmpl");
    const auto stories_path = o.stories ? *o.stories : out / "stories.jsonl";
    std::map<std::string, GeneratedStory> stories;
    for (const auto& row : read_jsonl(stories_path)) {
        try {
            auto s = row.get<GeneratedStory>();
            stories[s.video_id] = std::move(s);
        } catch (const json::exception& e) {
            throw ParseError(stories_path.string(), 0, e.what());
        }
    }

    SystemClock clock;
    LlmGateway gateway(clock);
    gateway.register_backend(cfg.backends.at(backend_id));
    ArtifactStore store(cache_dir(cfg, out));
    gateway.attach_store(&store);
    const StoryContext ctx{cfg.pipeline, templates, gateway, backend_id};

    std::vector<StageStatus> status(ds.items.size());
    std::vector<std::vector<Prediction>> preds(ds.items.size());
    parallel_for(ds.items.size(), o.jobs, [&](std::size_t i) {
        const auto& v = ds.items[i];
        auto it = stories.find(v.video_id);
        if (it == stories.end()) {
            status[i] = failure(v.video_id, StageError("no generated story"));
            return;
        }
        const auto& story = it->second;
        std::vector<std::string> problems;
        for (auto task : selected) {
            try {
                switch (kind_of(task)) {
                    case TaskKind::classification:
                        preds[i].push_back(classify(catalog.spec(task), story, ctx));
                        break;
                    case TaskKind::retrieval: {
                        const bool action = task == TaskId::action_retrieval;
                        const auto& gold = ds.ads.at(v.video_id);
                        std::vector<std::string> pool;
                        for (const auto& [id, other] : ds.ads) {
                            if (id == v.video_id) continue;
                            const auto& src = action ? other.actions : other.reasons;
                            pool.insert(pool.end(), src.begin(), src.end());
                        }
                        const auto& target = action ? gold.actions.front() : gold.reasons.front();
                        auto options = build_retrieval_options(
                            target, pool, retrieval_seed(cfg.pipeline.rng_seed, v.video_id, task));
                        preds[i].push_back(classify(catalog.spec(task, std::move(options)), story, ctx));
                        break;
                    }
                    case TaskKind::generation: {
                        std::optional<std::string> context;
                        StatementKind kind = StatementKind::action;
                        if (task == TaskId::reason_gen) kind = StatementKind::reason;
                        if (task == TaskId::reason_given_action) {
                            kind = StatementKind::reason_given_action;
                            context = ds.ads.at(v.video_id).actions.front();
                        }
                        preds[i].push_back(generate_statement(kind, story, context, catalog, ctx));
                        break;
                    }
                }
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                problems.push_back(std::string(to_string(task)) + ": " + e.what());
            } catch (const std::invalid_argument& e) {
                problems.push_back(std::string(to_string(task)) + ": " + e.what());
            }
        }
        if (problems.empty()) {
            status[i] = {StageState::done, {}};
        } else {
            for (const auto& p : problems) spdlog::warn("{}: {}", v.video_id, p);
            status[i] = {StageState::failed, join(problems, "; ")};
        }
    });

    std::vector<json> rows;
    for (auto i : order_by_id(ds)) {
        for (const auto& p : preds[i]) rows.push_back(p);
    }
    write_jsonl(out / "predictions.jsonl", rows);

    RunManifest manifest("tasks", cfg.pipeline, {{std::string(kStageTask), backend_id}}, current_timestamp());
    for (std::size_t i = 0; i < ds.items.size(); ++i) {
        manifest.add_video(ds.items[i].video_id);
        manifest.set_status(ds.items[i].video_id, status[i]);
    }
    return finish(manifest, out, "tasks");
}

// ---- evaluate -----------------------------------------------------------------

namespace {

MetricReport accuracy_report(TaskId task, const std::vector<std::string>& ids, double accuracy,
                             const std::function<bool(std::size_t)>& correct) {
    MetricReport r;
    r.title = std::string(to_string(task));
    r.n_items = ids.size();
    r.corpus["accuracy"] = accuracy;
    for (std::size_t i = 0; i < ids.size(); ++i) r.items.push_back({ids[i], {{"correct", correct(i) ? 1.0 : 0.0}}});
    return r;
}

}  // namespace

int cmd_evaluate(const Options& o, std::ostream& out) {
    const auto cfg = load_config(o, "");
    const auto catalog = TaskCatalog::load(resolve_data_dir(cfg));
    const auto name = require_dataset(o);
    const auto ds = open_dataset(o, cfg, catalog);
    std::vector<std::string> ids;
    for (auto i : order_by_id(ds)) ids.push_back(ds.items[i].video_id);
    if (ids.empty()) throw DatasetError(o.dataset + ": empty dataset");

    fs::path pred_path = *o.pred;
    if (fs::is_directory(pred_path)) {
        pred_path /= name == DatasetName::video_story ? "stories.jsonl" : "predictions.jsonl";
    }
    const auto rows = read_jsonl(pred_path);

    std::vector<MetricReport> accuracy;
    std::vector<MetricReport> generation;

    if (name == DatasetName::video_story) {
        std::map<std::string, std::string> hyp_by_id;
        for (const auto& row : rows) {
            try {
                auto s = row.get<GeneratedStory>();
                hyp_by_id[s.video_id] = s.text;
            } catch (const json::exception& e) {
                throw ParseError(pred_path.string(), 0, e.what());
            }
        }
        std::vector<std::string> hyps;
        std::vector<std::vector<std::string>> refs;
        for (const auto& id : ids) {
            auto it = hyp_by_id.find(id);
            if (it == hyp_by_id.end()) spdlog::warn("{}: no story, scored as empty", id);
            hyps.push_back(it == hyp_by_id.end() ? std::string{} : it->second);
            refs.push_back({ds.stories.at(id)});
        }
        generation.push_back(generation_report("story", ids, hyps, refs));
    } else {
        std::map<TaskId, std::map<std::string, Prediction>> by_task;
        for (const auto& row : rows) {
            Prediction p;
            try {
                p = row.get<Prediction>();
            } catch (const std::exception& e) {
                throw ParseError(pred_path.string(), 0, e.what());
            }
            const auto task = p.task_id;
            const auto id = p.video_id;
            if (!by_task[task].emplace(id, std::move(p)).second) {
                throw DatasetError(pred_path.string() + ": duplicate prediction for " + id + " / " +
                                   std::string(to_string(task)));
            }
        }
        if (by_task.empty()) throw DatasetError(pred_path.string() + ": no predictions");

        for (auto task : tasks_for(name)) {
            auto found = by_task.find(task);
            if (found == by_task.end()) continue;
            std::vector<Prediction> aligned;
            for (const auto& id : ids) {
                auto it = found->second.find(id);
                if (it != found->second.end()) {
                    aligned.push_back(it->second);
                } else {
                    spdlog::warn("{}: no {} prediction, scored as wrong", id, to_string(task));
                    aligned.push_back({id, task, std::nullopt, std::nullopt, {}, {}, {}});
                }
            }
            if (task == TaskId::persuasion) {
                std::vector<GoldLabelSet> gold;
                for (const auto& id : ids) gold.push_back({id, ds.persuasion.at(id).strategies});
                const auto acc = multilabel_hit_accuracy(aligned, gold);
                accuracy.push_back(accuracy_report(task, ids, acc, [&](std::size_t i) {
                    return aligned[i].label && gold[i].labels.count(*aligned[i].label) > 0;
                }));
            } else if (kind_of(task) != TaskKind::generation) {
                std::vector<GoldLabel> gold;
                for (const auto& id : ids) {
                    const auto& a = ds.ads.at(id);
                    std::string label;
                    switch (task) {
                        case TaskId::topic: label = a.topic; break;
                        case TaskId::emotion: label = a.majority_emotion(); break;
                        case TaskId::emotion_clubbed: label = catalog.emotions.club(a.majority_emotion()); break;
                        case TaskId::action_retrieval: label = a.actions.front(); break;
                        default: label = a.reasons.front(); break;
                    }
                    gold.push_back({id, label});
                }
                const auto acc = top1_accuracy(aligned, gold);
                accuracy.push_back(accuracy_report(task, ids, acc, [&](std::size_t i) {
                    return aligned[i].label && *aligned[i].label == gold[i].label;
                }));
            } else {
                std::vector<std::string> hyps;
                std::vector<std::vector<std::string>> refs;
                for (std::size_t i = 0; i < ids.size(); ++i) {
                    hyps.push_back(aligned[i].text.value_or(""));
                    const auto& a = ds.ads.at(ids[i]);
                    refs.push_back(task == TaskId::action_gen ? a.actions : a.reasons);
                }
                generation.push_back(generation_report(std::string(to_string(task)), ids, hyps, refs));
            }
        }
    }

    std::string text;
    if (!accuracy.empty()) text += format_report(accuracy);
    if (!accuracy.empty() && !generation.empty()) text += '\n';
    if (!generation.empty()) text += format_report(generation);
    out << text;

    if (o.out) {
        json reports = json::array();
        for (const auto& r : accuracy) reports.push_back(report_to_json(r));
        for (const auto& r : generation) reports.push_back(report_to_json(r));
        write_file_atomic((*o.out / "report.txt").string(), text);
        write_json(*o.out / "report.json", {{"dataset", o.dataset}, {"reports", reports}});
    }
    return kOk;
}

// ---- aggregate-annotations --------------------------------------------------------

int cmd_aggregate(const Options& o, std::ostream& out) {
    const auto cfg = load_config(o, "");
    const auto qmap = QuestionStrategyMap::load(resolve_data_dir(cfg) / "persuasion_questions.json");
    std::string text;
    try {
        text = read_file(o.annotations->string());
    } catch (const std::runtime_error& e) {
        throw DatasetError(e.what());
    }
    const auto sheets = parse_annotation_csv(text, o.annotations->string());
    const auto result =
        aggregate_annotations(sheets, qmap, o.min_agreement, affirmation_rule_from_string(o.rule));
    spdlog::info("{} videos retained, {} dropped below agreement {}", result.retained.size(), result.dropped.size(),
                 o.min_agreement);

    std::vector<json> rows(result.retained.begin(), result.retained.end());
    if (o.out) {
        write_jsonl(*o.out / "persuasion_labels.jsonl", rows);
        std::string dropped;
        for (const auto& d : result.dropped) dropped += d + "\n";
        write_file_atomic((*o.out / "dropped.txt").string(), dropped);
    } else {
        for (const auto& r : rows) out << r.dump() << '\n';
    }
    return kOk;
}

// ---- stats ------------------------------------------------------------------------

int cmd_stats(const Options& o, std::ostream& out) {
    const auto cfg = load_config(o, "");
    const auto catalog = TaskCatalog::load(resolve_data_dir(cfg));
    const auto ds = open_dataset(o, cfg, catalog);
    auto j = to_json(corpus_stats(ds));
    j["dataset"] = o.dataset;
    out << j.dump(2) << '\n';
    if (o.out) write_json(*o.out / "stats.json", j);
    return kOk;
}

// ---- cache ------------------------------------------------------------------------

int cmd_cache(const Options& o, std::ostream& out) {
    const auto cfg = load_config(o, "");
    if (!cfg.cache_dir && !o.out) throw std::invalid_argument("cache needs --out or cache_dir in the config");
    ArtifactStore store(cfg.cache_dir ? *cfg.cache_dir : *o.out / "cache");
    if (o.cache_action == "verify") {
        const auto bad = store.verify();
        for (const auto& k : bad) out << "corrupt " << k << '\n';
        out << store.keys().size() << " records, " << bad.size() << " corrupt\n";
        if (!bad.empty()) throw CorruptArtifact(std::to_string(bad.size()) + " corrupt cache records");
        return kOk;
    }
    if (o.cache_action == "clear") {
        out << store.clear() << " records removed\n";
        return kOk;
    }
    std::uintmax_t bytes = 0;
    const auto keys = store.keys();
    for (const auto& k : keys) bytes += fs::file_size(store.path_for(k));
    out << json{{"dir", store.dir().string()}, {"records", keys.size()}, {"bytes", bytes}}.dump(2) << '\n';
    return kOk;
}

}  // namespace storyverb::cli
