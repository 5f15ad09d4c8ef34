#include "storyverb_cli/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "storyverb/errors.hpp"

namespace storyverb::cli {

namespace {

const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::usage: return "usage";
        case ErrorKind::config: return "config";
        case ErrorKind::backend: return "backend";
        case ErrorKind::data: return "data";
        case ErrorKind::stage: return "stage";
        case ErrorKind::integrity: return "integrity";
    }
    return "internal";
}

int exit_code_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::usage: return kUsage;
        case ErrorKind::config:
        case ErrorKind::data: return kConfig;
        default: return kBackend;
    }
}

// One line per problem: `storyverb: error kind=<kind> [field=<f>] msg=<json string>`.
void error_line(std::ostream& err, std::string_view kind, std::string_view field, std::string_view msg) {
    err << "storyverb: error kind=" << kind;
    if (!field.empty()) err << " field=" << field;
    err << " msg=" << nlohmann::json(std::string(msg)).dump() << '\n';
}

// Pulls `--section.field=value` overrides out of the argument list.
std::vector<std::string> take_overrides(const std::vector<std::string>& args, std::vector<ConfigOverride>& overrides,
                                        std::vector<std::string>& unknown) {
    std::vector<std::string> rest;
    for (const auto& a : args) {
        if (a.rfind("--", 0) == 0) {
            const auto eq = a.find('=');
            const auto key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
            if (key.find('.') != std::string::npos) {
                if (eq == std::string::npos || !is_config_key(key)) {
                    unknown.push_back(a);
                } else {
                    overrides.push_back({key, a.substr(eq + 1)});
                }
                continue;
            }
        }
        rest.push_back(a);
    }
    return rest;
}

class ScopedLogger {
public:
    ScopedLogger(std::ostream& err, bool verbose, bool quiet) : previous_(spdlog::default_logger()) {
        auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
        auto logger = std::make_shared<spdlog::logger>("storyverb", sink);
        logger->set_pattern("storyverb: %l: %v");
        logger->set_level(quiet ? spdlog::level::err : verbose ? spdlog::level::debug : spdlog::level::info);
        spdlog::set_default_logger(logger);
    }
    ~ScopedLogger() { spdlog::set_default_logger(previous_); }

private:
    std::shared_ptr<spdlog::logger> previous_;
};

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    Options opts;
    std::vector<std::string> unknown;
    auto args = take_overrides(raw_args, opts.overrides, unknown);
    if (!unknown.empty()) {
        for (const auto& u : unknown) error_line(err, "usage", "", "unknown option " + u);
        return kUsage;
    }

    CLI::App app{"Video verbalization and evaluation pipeline", "storyverb"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");
    bool verbose = false;
    bool quiet = false;
    std::string config, data_root, out_dir, pred, stories, annotations;
    std::int64_t seed = 0;

    app.add_option("--config", config, "YAML configuration file");
    app.add_option("--dataset", opts.dataset, "video_story | video_ads | persuasion")
        ->check(CLI::IsMember({"video_story", "video_ads", "persuasion"}));
    app.add_option("--data-root", data_root, "dataset directory (overrides datasets.<name>)");
    app.add_option("--backend", opts.backend, "text backend id for the story or tasks stage");
    app.add_option("--jobs", opts.jobs, "worker threads")->check(CLI::Range(1, 256));
    auto* seed_opt = app.add_option("--seed", seed, "retrieval sampling seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("-v,--verbose", verbose, "debug logging");
    app.add_flag("-q,--quiet", quiet, "errors only");

    auto* verbalize = app.add_subcommand("verbalize", "extract captions, OCR, transcript and metadata per video");
    auto* story = app.add_subcommand("story", "assemble story prompts and generate stories");
    auto* tasks = app.add_subcommand("tasks", "run downstream tasks on generated stories");
    tasks->add_option("--stories", stories, "stories.jsonl (default: <out>/stories.jsonl)");
    tasks->add_option("--task", opts.tasks, "restrict to these tasks")->delimiter(',');
    auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold labels");
    evaluate->add_option("--pred", pred, "prediction file or directory")->required();
    auto* aggregate = app.add_subcommand("aggregate-annotations", "turn annotation sheets into strategy labels");
    aggregate->add_option("--annotations", annotations, "CSV of annotator answers")->required();
    aggregate->add_option("--min-agreement", opts.min_agreement, "agreement threshold")->check(CLI::Range(0.0, 1.0));
    aggregate->add_option("--rule", opts.rule, "affirmation rule")
        ->check(CLI::IsMember({"majority", "any", "unanimous"}));
    auto* stats = app.add_subcommand("stats", "corpus statistics");
    auto* cache = app.add_subcommand("cache", "inspect or clear the artifact cache");
    cache->add_option("action", opts.cache_action, "verify | clear | stats")
        ->required()
        ->check(CLI::IsMember({"verify", "clear", "stats"}));

    for (auto* sub : {verbalize, story, tasks, evaluate, aggregate, stats, cache}) sub->fallthrough();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        error_line(err, "usage", "", e.what());
        return kUsage;
    }

    opts.verb = app.get_subcommands().front()->get_name();
    if (!config.empty()) opts.config = config;
    if (!data_root.empty()) opts.data_root = data_root;
    if (!out_dir.empty()) opts.out = out_dir;
    if (!pred.empty()) opts.pred = pred;
    if (!stories.empty()) opts.stories = stories;
    if (!annotations.empty()) opts.annotations = annotations;
    if (seed_opt->count() > 0) opts.seed = seed;

    ScopedLogger logger(err, verbose, quiet);
    try {
        if (opts.verb == "verbalize") return cmd_verbalize(opts, out);
        if (opts.verb == "story") return cmd_story(opts, out);
        if (opts.verb == "tasks") return cmd_tasks(opts, out);
        if (opts.verb == "evaluate") return cmd_evaluate(opts, out);
        if (opts.verb == "aggregate-annotations") return cmd_aggregate(opts, out);
        if (opts.verb == "stats") return cmd_stats(opts, out);
        return cmd_cache(opts, out);
    } catch (const ConfigError& e) {
        for (const auto& v : e.violations()) error_line(err, "config", v.field, v.message);
        return kConfig;
    } catch (const Error& e) {
        error_line(err, kind_name(e.kind()), "", e.what());
        return exit_code_for(e.kind());
    } catch (const std::invalid_argument& e) {
        error_line(err, "usage", "", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        error_line(err, "internal", "", e.what());
        return kBackend;
    }
}

}  // namespace storyverb::cli
