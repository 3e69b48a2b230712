#include "mcrg/cli.hpp"

#include "mcrg/errors.hpp"
#include "mcrg/ingest.hpp"
#include "mcrg/log.hpp"
#include "mcrg/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace mcrg {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Flags {
    std::string corpus;
    std::string split;
    std::string config;
    std::string task;
    std::uint64_t seed = 0;
    std::string out;
    double threshold = 0.5;
    int stability_window = 2;
    double ratio = 0.8;
    std::string input;
    std::string file;
    std::string model;
    std::string topic_model;
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const std::string& path, const std::string& what) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw SchemaError(what, "<document>", fmt::format("'{}' is not valid JSON: {}", path, e.what()));
    }
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

// Writes to --out when given, to `out` otherwise.
void emit(const Flags& f, std::ostream& out, const std::string& text) {
    if (f.out.empty()) {
        out << text;
    } else {
        write_text(f.out, text);
    }
}

bool given(const CLI::App* sub, const char* name) {
    const CLI::Option* o = sub->get_option_no_throw(name);
    return o && o->count() > 0;
}

// Config file, else `fallback`, then the flags given on the command line.
RunConfig resolve_config(const CLI::App* sub, const Flags& f, const json& fallback = json()) {
    RunConfig c;
    if (!f.config.empty()) {
        c = run_config_from_json(read_json(f.config, "run config"));
    } else if (!fallback.is_null()) {
        c = run_config_from_json(fallback);
    }
    if (given(sub, "--task")) c.task = task_from_name(f.task);
    if (given(sub, "--seed")) c.seed = f.seed;
    if (given(sub, "--threshold")) c.threshold = f.threshold;
    if (given(sub, "--stability-window")) c.stability_window = f.stability_window;
    if (given(sub, "--ratio")) c.ratio = f.ratio;
    c.resolve();
    return c;
}

json recorded_config(const Checkpoint& ck) { return ck.run_config.value("config", json()); }

DatasetSplit read_split(const std::string& path) { return split_from_json(read_json(path, "split")); }

void run_ingest(const CLI::App* sub, const Flags& f) {
    RunConfig cfg = resolve_config(sub, f);
    NormalizeResult r = normalize_export(read_export_file(f.input), {cfg.pseudonym_salt, cfg.diff_context});
    save_corpus(r.corpus, f.out);
    log::info("ingested {} pull requests, skipped {} records", r.corpus.pull_requests.size(), r.skipped.size());
}

void run_stats(const Flags& f, std::ostream& out) {
    ReviewCorpus corpus = load_corpus(f.corpus);
    emit(f, out, to_json(corpus_stats(corpus)).dump(2) + "\n");
}

void run_parse(const Flags& f, std::ostream& out) {
    AstGraph g = parse_source(read_text(f.file), f.file);
    emit(f, out, to_json(g).dump() + "\n");
}

void run_label(const CLI::App* sub, const Flags& f, std::ostream& out) {
    RunConfig cfg = resolve_config(sub, f);
    ReviewCorpus corpus = load_corpus(f.corpus);
    LabeledCorpus labeled = label_corpus(corpus, cfg.stability_window);
    json graphs = json::array();
    for (const auto& g : labeled.graphs) graphs.push_back(to_json(g));
    json doc = {{"config", to_json(cfg)}, {"graphs", graphs}, {"skipped", labeled.skipped}};
    emit(f, out, doc.dump() + "\n");
}

void run_split(const CLI::App* sub, const Flags& f, std::ostream& out) {
    RunConfig cfg = resolve_config(sub, f);
    ReviewCorpus corpus = load_corpus(f.corpus);
    json doc = to_json(split_dataset(corpus, cfg.ratio, cfg.seed));
    doc["config"] = to_json(cfg);
    doc["corpus_digest"] = corpus_digest(corpus);
    emit(f, out, doc.dump(2) + "\n");
}

void run_train(const CLI::App* sub, const Flags& f) {
    RunConfig cfg = resolve_config(sub, f);
    ReviewCorpus corpus = load_corpus(f.corpus);
    Checkpoint ck = train_run(corpus, read_split(f.split), cfg);
    save_checkpoint(ck, f.out);
    log::info("wrote {} checkpoint to {}", task_name(cfg.task), f.out);
}

void run_evaluate(const CLI::App* sub, const Flags& f, std::ostream& out) {
    Checkpoint ck = load_checkpoint(f.model);
    RunConfig cfg = resolve_config(sub, f, recorded_config(ck));
    if (given(sub, "--task") && cfg.task != ck.model->config.task) {
        throw ConfigMismatch(fmt::format("--task {} but the checkpoint is a {} model", f.task,
                                         task_name(ck.model->config.task)));
    }
    ReviewCorpus corpus = load_corpus(f.corpus);
    MetricsReport report = evaluate_run(ck, corpus, read_split(f.split), cfg);
    json doc = to_json(report);
    doc["config"] = to_json(cfg);
    doc["checkpoint_run"] = ck.run_config;
    emit(f, out, doc.dump(2) + "\n");
}

void run_predict(const CLI::App* sub, const Flags& f) {
    Checkpoint ck = load_checkpoint(f.model);
    std::optional<Checkpoint> topic;
    if (!f.topic_model.empty()) topic = load_checkpoint(f.topic_model);
    RunConfig cfg = resolve_config(sub, f, recorded_config(ck));
    const Model* topic_model = topic ? topic->model.get() : nullptr;

    std::vector<ReportDocument> docs;
    if (!f.file.empty()) {
        const std::string source = read_text(f.file);
        docs.push_back(predict_report(parse_source(source, f.file), source, *ck.model, topic_model, cfg.threshold));
    } else {
        ReviewCorpus corpus = load_corpus(f.corpus);
        std::set<std::string> ids;
        if (f.split.empty()) {
            for (const auto& pr : corpus.pull_requests) ids.insert(pr.id);
        } else {
            DatasetSplit split = read_split(f.split);
            check_split_matches(corpus, split);
            ids = split.test_pr_ids;
        }
        docs = predict_run(corpus, ids, *ck.model, topic_model, cfg);
    }
    json records = json::array();
    for (const auto& d : docs) records.push_back(to_json(d));
    const fs::path dir(f.out);
    write_text(dir / "report.txt", render_report(docs));
    write_text(dir / "report.json", json({{"config", to_json(cfg)}, {"documents", records}}).dump() + "\n");
    log::info("wrote reports for {} files to {}", docs.size(), dir.string());
}

std::string error_kind(const Error& e) {
    if (dynamic_cast<const IoError*>(&e)) return "IoError";
    if (dynamic_cast<const MalformedDiff*>(&e)) return "MalformedDiff";
    if (dynamic_cast<const HunkMismatch*>(&e)) return "HunkMismatch";
    if (dynamic_cast<const SchemaError*>(&e)) return "SchemaError";
    if (dynamic_cast<const UnknownRevision*>(&e)) return "UnknownRevision";
    if (dynamic_cast<const RevisionMismatch*>(&e)) return "RevisionMismatch";
    if (dynamic_cast<const SyntaxError*>(&e)) return "SyntaxError";
    if (dynamic_cast<const OutOfRange*>(&e)) return "OutOfRange";
    if (dynamic_cast<const DimensionMismatch*>(&e)) return "DimensionMismatch";
    if (dynamic_cast<const EmptyMask*>(&e)) return "EmptyMask";
    if (dynamic_cast<const GraphDetached*>(&e)) return "GraphDetached";
    if (dynamic_cast<const EmptyDataset*>(&e)) return "EmptyDataset";
    if (dynamic_cast<const EmptyInput*>(&e)) return "EmptyInput";
    if (dynamic_cast<const SingleClassAuc*>(&e)) return "SingleClassAuc";
    if (dynamic_cast<const InvalidArgument*>(&e)) return "InvalidArgument";
    if (dynamic_cast<const ConfigMismatch*>(&e)) return "ConfigMismatch";
    return "Error";
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Review-comment location, topic and quality models over MiniJ ASTs", "mcr-graph"};
    app.require_subcommand(1);
    Flags f;

    auto corpus_opt = [&](CLI::App* s, bool required) {
        auto* o = s->add_option("--corpus", f.corpus, "corpus JSON-lines file");
        if (required) o->required();
    };
    auto config_opt = [&](CLI::App* s) { s->add_option("--config", f.config, "run configuration JSON"); };
    auto task_opt = [&](CLI::App* s) {
        s->add_option("--task", f.task, "likelihood, topic or quality")
            ->check(CLI::IsMember({"likelihood", "topic", "quality"}));
    };
    auto window_opt = [&](CLI::App* s) {
        s->add_option("--stability-window", f.stability_window, "revisions a region must stay unchanged")
            ->check(CLI::PositiveNumber);
    };
    auto threshold_opt = [&](CLI::App* s) {
        s->add_option("--threshold", f.threshold, "likelihood marker threshold")->check(CLI::Range(0.0, 1.0));
    };

    auto* ingest = app.add_subcommand("ingest", "normalize a provider export into a corpus");
    ingest->add_option("--input", f.input, "export file (JSON array or one document per line)")->required();
    ingest->add_option("--out", f.out, "corpus file to write")->required();
    config_opt(ingest);

    auto* stats = app.add_subcommand("stats", "corpus statistics as JSON");
    corpus_opt(stats, true);
    stats->add_option("--out", f.out, "output file (default stdout)");

    auto* parse = app.add_subcommand("parse", "parse a MiniJ file into an AST graph");
    parse->add_option("--file", f.file, "MiniJ source file")->required();
    parse->add_option("--out", f.out, "output file (default stdout)");

    auto* label = app.add_subcommand("label", "label every revision of a corpus");
    corpus_opt(label, true);
    config_opt(label);
    window_opt(label);
    label->add_option("--out", f.out, "output file (default stdout)");

    auto* split = app.add_subcommand("split", "split pull requests into train and test");
    corpus_opt(split, true);
    config_opt(split);
    split->add_option("--ratio", f.ratio, "train fraction")->check(CLI::Range(0.0, 1.0));
    split->add_option("--seed", f.seed, "split seed");
    split->add_option("--out", f.out, "output file (default stdout)");

    auto* train_cmd = app.add_subcommand("train", "train a model on the train split");
    corpus_opt(train_cmd, true);
    train_cmd->add_option("--split", f.split, "split file")->required();
    config_opt(train_cmd);
    task_opt(train_cmd);
    window_opt(train_cmd);
    train_cmd->add_option("--seed", f.seed, "training seed");
    train_cmd->add_option("--out", f.out, "checkpoint file to write")->required();

    auto* evaluate = app.add_subcommand("evaluate", "metrics of a checkpoint on the test split");
    corpus_opt(evaluate, true);
    evaluate->add_option("--split", f.split, "split file the checkpoint was trained with")->required();
    evaluate->add_option("--model", f.model, "checkpoint file")->required();
    config_opt(evaluate);
    task_opt(evaluate);
    window_opt(evaluate);
    threshold_opt(evaluate);
    evaluate->add_option("--out", f.out, "metrics file (default stdout)");

    auto* predict = app.add_subcommand("predict", "annotated likelihood reports");
    predict->add_option("--model", f.model, "likelihood checkpoint")->required();
    predict->add_option("--topic-model", f.topic_model, "topic checkpoint");
    auto* file_opt = predict->add_option("--file", f.file, "single MiniJ file to annotate");
    auto* pc = predict->add_option("--corpus", f.corpus, "corpus; reports the last revision of every file");
    file_opt->excludes(pc);
    predict->add_option("--split", f.split, "restrict to the test pull requests of this split")->needs(pc);
    config_opt(predict);
    window_opt(predict);
    threshold_opt(predict);
    predict->add_option("--out", f.out, "directory for report.txt and report.json")->required();

    if (!args.empty() && !args[0].starts_with("-") && !app.get_subcommand_no_throw(args[0])) {
        err << "mcr-graph: unknown subcommand '" << args[0] << "'\n\n" << app.help();
        return 2;
    }

    std::vector<const char*> argv = {"mcr-graph"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (predict->parsed() && f.file.empty() && f.corpus.empty()) {
            throw CLI::RequiredError("predict needs --file or --corpus");
        }
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "mcr-graph: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (ingest->parsed()) run_ingest(ingest, f);
        if (stats->parsed()) run_stats(f, out);
        if (parse->parsed()) run_parse(f, out);
        if (label->parsed()) run_label(label, f, out);
        if (split->parsed()) run_split(split, f, out);
        if (train_cmd->parsed()) run_train(train_cmd, f);
        if (evaluate->parsed()) run_evaluate(evaluate, f, out);
        if (predict->parsed()) run_predict(predict, f);
    } catch (const Error& e) {
        err << json({{"error", error_kind(e)}, {"message", e.what()}}).dump() << "\n";
        return 1;
    } catch (const fs::filesystem_error& e) {
        err << json({{"error", "IoError"}, {"message", e.what()}}).dump() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace mcrg
