/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "storystream.hpp"

namespace fs = std::filesystem;
using namespace storystream;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitStreamOrder = 2;

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("storystream");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("STORYSTREAM_LOG")) {
        spdlog::set_level(spdlog::level::from_str(level));
    }
}

struct RunOptions {
    fs::path config;
    fs::path input;
    fs::path out;
    std::optional<std::int64_t> span;
    std::optional<std::int64_t> interval;
    std::optional<std::int64_t> lateness;
    std::optional<std::string> transform;
    std::optional<double> epsilon;
    std::optional<double> resolution;
    std::optional<std::string> cadence;
};

int run_command(const RunOptions& opt) {
    RunConfig cfg;
    try {
        if (!opt.config.empty()) {
            cfg = load_run_config(opt.config);
        }
        if (opt.span) cfg.span = *opt.span;
        if (opt.interval) cfg.interval = *opt.interval;
        if (opt.lateness) cfg.lateness = *opt.lateness;
        if (opt.transform) cfg.transform.kind = parse_transform_kind(*opt.transform);
        if (opt.epsilon) cfg.transform.epsilon = *opt.epsilon;
        if (opt.resolution) cfg.louvain.resolution = *opt.resolution;
        if (opt.cadence) {
            cfg.cadence = *opt.cadence == "final-only" ? SnapshotCadence::FinalOnly : SnapshotCadence::PerSlide;
        }
        cfg.validate();
    } catch (const Error& e) {
        spdlog::error("configuration: {}", e.what());
        return kExitInput;
    }

    std::ifstream in(opt.input);
    if (!in) {
        spdlog::error("cannot open input {}", opt.input.string());
        return kExitInput;
    }
    std::error_code ec;
    fs::create_directories(opt.out, ec);
    if (ec) {
        spdlog::error("cannot create output directory {}: {}", opt.out.string(), ec.message());
        return kExitInput;
    }

    try {
        const ArticleReader reader(cfg.vectors);
        StoryPipeline pipeline(cfg);
        std::size_t written = 0;
        const auto write_snapshot = [&](const Json& snap, const std::string& name) {
            write_file_atomic(opt.out / name, snap.dump(2) + "\n");
            spdlog::info("wrote {}", name);
        };

        std::string line;
        std::size_t line_no = 0;
        std::size_t articles = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto article = reader.parse(line, line_no);
            spdlog::debug("line {}: article {}", line_no, article.id);
            for (const auto& snap : pipeline.process(std::move(article))) {
                write_snapshot(snap, fmt::format("snapshot-{:04d}.json", ++written));
            }
            ++articles;
        }
        if (articles == 0) {
            spdlog::error("no articles");
            std::cerr << "no articles\n";
            return kExitInput;
        }
        write_snapshot(pipeline.finish(), "snapshot-final.json");
        write_file_atomic(opt.out / "assignments.jsonl", assignments_jsonl(pipeline.assignments()));
        spdlog::info("{} articles, {} stories", articles, pipeline.network().stories().size());
    } catch (const Error& e) {
        const bool order = e.code() == Errc::OutOfOrder || e.code() == Errc::DuplicateArticle;
        spdlog::error("{}", e.what());
        return order ? kExitStreamOrder : kExitInput;
    } catch (const std::filesystem::filesystem_error& e) {
        spdlog::error("{}", e.what());
        return kExitInput;
    }
    return kExitOk;
}

int eval_command(const fs::path& pred_path, const fs::path& gold_path, const fs::path& out) {
    Labeling pred, gold;
    try {
        pred = load_labels(pred_path);
        gold = load_labels(gold_path);
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return kExitInput;
    }
    const auto diff = id_set_difference(pred, gold);
    if (!diff.empty() || pred.empty()) {
        std::cerr << "IdSetMismatch\n";
        for (const auto& id : diff.only_in_pred) std::cerr << "  only in pred: " << id << "\n";
        for (const auto& id : diff.only_in_gold) std::cerr << "  only in gold: " << id << "\n";
        return kExitInput;
    }
    std::set<std::string> pred_labels, gold_labels;
    for (const auto& [id, l] : pred) pred_labels.insert(l);
    for (const auto& [id, l] : gold) gold_labels.insert(l);
    const Json report{{"f1", pairwise_f1(pred, gold)},
                      {"nmi", nmi(pred, gold)},
                      {"n_articles", pred.size()},
                      {"n_pred_stories", pred_labels.size()},
                      {"n_gold_stories", gold_labels.size()},
                      {"f1_variant", "pairwise"},
                      {"nmi_normalization", "arithmetic"}};
    const auto text = report.dump(2) + "\n";
    std::cout << text;
    if (!out.empty()) {
        try {
            write_file_atomic(out, text);
        } catch (const Error& e) {
            spdlog::error("{}", e.what());
            return kExitInput;
        }
    }
    return kExitOk;
}

int export_dot_command(const fs::path& snapshot_path) {
    std::ifstream in(snapshot_path);
    if (!in) {
        spdlog::error("cannot open snapshot {}", snapshot_path.string());
        return kExitInput;
    }
    try {
        nlohmann::json snap;
        try {
            snap = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(Errc::ParseError, e.what());
        }
        std::cout << export_dot(snap);
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return kExitInput;
    }
    return kExitOk;
}

}// namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Streaming news story construction"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Cluster an article stream into stories");
    run_cmd->add_option("--config", run.config, "JSON run configuration")->check(CLI::ExistingFile);
    run_cmd->add_option("--input", run.input, "JSON Lines article stream")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out", run.out, "Output directory")->required();
    run_cmd->add_option("--span", run.span, "Window span in configured units");
    run_cmd->add_option("--interval", run.interval, "Inching interval in configured units");
    run_cmd->add_option("--lateness", run.lateness, "Lateness tolerance in configured units");
    run_cmd->add_option("--transform", run.transform, "Cosine to weight transform")
        ->check(CLI::IsMember({"clamp", "shift"}));
    run_cmd->add_option("--epsilon", run.epsilon, "Edge weight threshold");
    run_cmd->add_option("--resolution", run.resolution, "Modularity resolution");
    run_cmd->add_option("--cadence", run.cadence, "Snapshot cadence")
        ->check(CLI::IsMember({"per-slide", "final-only"}));

    fs::path pred, gold, eval_out;
    auto* eval_cmd = app.add_subcommand("eval", "Score predicted stories against gold labels");
    eval_cmd->add_option("--pred", pred, "Predicted labels (JSON Lines)")->required();
    eval_cmd->add_option("--gold", gold, "Gold labels (JSON Lines)")->required();
    eval_cmd->add_option("--out", eval_out, "Also write the report here");

    fs::path snapshot;
    auto* dot_cmd = app.add_subcommand("export-dot", "Render a snapshot as Graphviz DOT");
    dot_cmd->add_option("--snapshot", snapshot, "Snapshot JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }

    if (*run_cmd) return run_command(run);
    if (*eval_cmd) return eval_command(pred, gold, eval_out);
    if (*dot_cmd) return export_dot_command(snapshot);
    return kExitInput;
}
