#include "mcrg/pipeline.hpp"

#include "mcrg/errors.hpp"
#include "mcrg/hash.hpp"
#include "mcrg/log.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace mcrg {

using nlohmann::json;

void RunConfig::resolve() {
    model.task = task;
    train.seed = seed;
    if (!(ratio > 0 && ratio < 1)) throw InvalidArgument(fmt::format("ratio {} outside (0, 1)", ratio));
    if (!(threshold >= 0 && threshold <= 1)) throw InvalidArgument(fmt::format("threshold {} outside [0, 1]", threshold));
    if (stability_window < 1) throw InvalidArgument("stability window must be at least 1");
    if (diff_context < 0) throw InvalidArgument("diff context must be non-negative");
    model.validate();
    train.validate();
}

RunConfig run_config_from_json(const json& j) {
    static const std::set<std::string> known = {"task",  "seed",  "ratio",        "threshold", "stability_window",
                                                "model", "train", "encoder_checkpoint", "pseudonym_salt",
                                                "diff_context"};
    if (!j.is_object()) throw SchemaError("run config", "<document>", "expected an object");
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw SchemaError("run config", key, "unknown key");
    }
    RunConfig c;
    try {
        if (j.contains("task")) c.task = task_from_name(j.at("task").get<std::string>());
        c.seed = j.value("seed", c.seed);
        c.ratio = j.value("ratio", c.ratio);
        c.threshold = j.value("threshold", c.threshold);
        c.stability_window = j.value("stability_window", c.stability_window);
        if (j.contains("model")) c.model = model_config_from_json(j.at("model"));
        if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
        c.encoder_checkpoint = j.value("encoder_checkpoint", c.encoder_checkpoint);
        c.pseudonym_salt = j.value("pseudonym_salt", c.pseudonym_salt);
        c.diff_context = j.value("diff_context", c.diff_context);
    } catch (const json::exception& e) {
        throw SchemaError("run config", "<document>", e.what());
    }
    return c;
}

json to_json(const RunConfig& c) {
    return {{"task", task_name(c.task)},
            {"seed", c.seed},
            {"ratio", c.ratio},
            {"threshold", c.threshold},
            {"stability_window", c.stability_window},
            {"model", to_json(c.model)},
            {"train", to_json(c.train)},
            {"encoder_checkpoint", c.encoder_checkpoint},
            {"pseudonym_salt", c.pseudonym_salt},
            {"diff_context", c.diff_context}};
}

std::string corpus_digest(const ReviewCorpus& corpus) { return hex64(stable_hash64(serialize_corpus(corpus))); }

std::string id_set_digest(const std::set<std::string>& ids) {
    std::string joined;
    for (const auto& id : ids) {
        joined += id;
        joined += '\n';
    }
    return hex64(stable_hash64(joined));
}

ReviewCorpus corpus_subset(const ReviewCorpus& corpus, const std::set<std::string>& ids) {
    ReviewCorpus out;
    out.schema_version = corpus.schema_version;
    for (const auto& pr : corpus.pull_requests) {
        if (ids.count(pr.id)) out.pull_requests.push_back(pr);
    }
    return out;
}

void check_split_matches(const ReviewCorpus& corpus, const DatasetSplit& split) {
    std::size_t seen = 0;
    for (const auto& pr : corpus.pull_requests) {
        const bool train = split.train_pr_ids.count(pr.id) > 0;
        const bool test = split.test_pr_ids.count(pr.id) > 0;
        if (train == test) throw ConfigMismatch(fmt::format("split does not place PR '{}' on exactly one side", pr.id));
        ++seen;
    }
    if (seen != split.train_pr_ids.size() + split.test_pr_ids.size()) {
        throw ConfigMismatch("split names PRs that are not in the corpus");
    }
}

TaskDataset build_dataset(const ReviewCorpus& corpus, const std::set<std::string>& pr_ids, const RunConfig& config) {
    if (config.task == Task::quality) return quality_dataset(corpus, pr_ids, config.model.features);
    LabeledCorpus labeled = label_corpus(corpus_subset(corpus, pr_ids), config.stability_window);
    return node_dataset(config.task, labeled.graphs, config.model.features);
}

Checkpoint train_run(const ReviewCorpus& corpus, const DatasetSplit& split, const RunConfig& config) {
    check_split_matches(corpus, split);
    RunConfig cfg = config;
    cfg.resolve();
    std::shared_ptr<const Model> encoder;
    if (cfg.task == Task::quality) {
        if (!cfg.encoder_checkpoint.empty()) {
            encoder = load_checkpoint(cfg.encoder_checkpoint).model;
            if (encoder->config.task == Task::quality) throw ConfigMismatch("encoder checkpoint is a quality model");
        } else {
            RunConfig enc = cfg;
            enc.task = Task::likelihood;
            enc.resolve();
            log::info("training likelihood encoder for the quality model");
            encoder = train(build_dataset(corpus, split.train_pr_ids, enc), enc.model, enc.train).model;
        }
        cfg.model.features = encoder->config.features;
    }
    Checkpoint ck = train(build_dataset(corpus, split.train_pr_ids, cfg), cfg.model, cfg.train, encoder);
    for (std::size_t e = 0; e < ck.epoch_losses.size(); ++e) {
        log::info("epoch {}/{} loss {:.6f}", e + 1, ck.epoch_losses.size(), ck.epoch_losses[e]);
    }
    ck.run_config = {{"config", to_json(cfg)},
                     {"corpus_digest", corpus_digest(corpus)},
                     {"split",
                      {{"seed", split.seed},
                       {"ratio", split.ratio},
                       {"n_train", split.train_pr_ids.size()},
                       {"train_digest", id_set_digest(split.train_pr_ids)}}}};
    return ck;
}

void check_split_provenance(const Checkpoint& checkpoint, const DatasetSplit& split) {
    const json& rc = checkpoint.run_config;
    if (!rc.contains("split") || !rc.at("split").contains("train_digest")) {
        throw ConfigMismatch("checkpoint records no training split");
    }
    if (rc.at("split").at("train_digest") != id_set_digest(split.train_pr_ids)) {
        throw ConfigMismatch("split differs from the one the checkpoint was trained on");
    }
}

namespace {

MetricsReport evaluate_nodes(const Model& model, const TaskDataset& data, double threshold) {
    std::vector<double> scores;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (const auto& g : data.graphs) {
        const nn::Matrix p = predict_node_probabilities(model, g.input);
        for (int i = 0; i < g.input.n; ++i) {
            if (!g.mask[i]) continue;
            labels.push_back(g.labels[i]);
            scores.push_back(p(i, 1));
            rows.emplace_back(p.row(i).data(), p.row(i).data() + p.cols());
        }
    }
    if (labels.empty()) throw EmptyInput("no labeled nodes in the test split");
    return data.task == Task::likelihood ? evaluate_classification(scores, labels, threshold)
                                         : evaluate_classification(rows, labels);
}

MetricsReport evaluate_quality(const Model& model, const TaskDataset& data, double threshold) {
    if (data.comments.empty()) throw EmptyInput("no comments in the test split");
    QualityInputs in;
    const auto n = static_cast<Eigen::Index>(data.comments.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& c = data.comments[i];
        in.comment_ids.push_back(model.vocab.encode(c.tokens));
        nn::Matrix emb = encode_nodes(*model.encoder, c.graph);
        if (i == 0) in.node_embeddings = nn::Matrix(n, emb.cols());
        in.node_embeddings.row(i) = emb.row(c.anchored_node);
    }
    const nn::Matrix out = forward_quality(model, in).value();
    std::vector<double> act_scores, clarity_pred, clarity_gold;
    std::vector<int> act_labels;
    for (Eigen::Index i = 0; i < n; ++i) {
        act_scores.push_back(out(i, 0));
        act_labels.push_back(static_cast<int>(data.comments[i].actionability));
        clarity_pred.push_back(out(i, 1));
        clarity_gold.push_back(data.comments[i].clarity);
    }
    MetricsReport r = evaluate_classification(act_scores, act_labels, threshold);
    RegressionMetrics reg = evaluate_regression(clarity_pred, clarity_gold);
    r.mae = reg.mae;
    r.rmse = reg.rmse;
    return r;
}

}  // namespace

MetricsReport evaluate_run(const Checkpoint& checkpoint, const ReviewCorpus& corpus, const DatasetSplit& split,
                           const RunConfig& config) {
    check_split_matches(corpus, split);
    check_split_provenance(checkpoint, split);
    const Model& model = *checkpoint.model;
    RunConfig cfg = config;
    cfg.task = model.config.task;
    cfg.model = model.config;
    if (model.encoder) cfg.model.features = model.encoder->config.features;
    TaskDataset test = build_dataset(corpus, split.test_pr_ids, cfg);
    MetricsReport r = cfg.task == Task::quality ? evaluate_quality(model, test, cfg.threshold)
                                                : evaluate_nodes(model, test, cfg.threshold);
    r.task = std::string(task_name(cfg.task));
    return r;
}

std::vector<ReportDocument> predict_run(const ReviewCorpus& corpus, const std::set<std::string>& pr_ids,
                                        const Model& likelihood, const Model* topic, const RunConfig& config) {
    std::vector<ReportDocument> docs;
    for (const auto& pr : corpus.pull_requests) {
        if (!pr_ids.count(pr.id)) continue;
        for (const auto& path : pr.file_paths()) {
            const FileRevision* rev = pr.find_revision(path, pr.last_revision_index(path));
            AstGraph g;
            try {
                g = parse_source(rev->content, rev->file_path, rev->revision_index);
            } catch (const SyntaxError& e) {
                log::warn("no report for unparsable revision {} {}#{}: {}", pr.id, path, rev->revision_index,
                          e.what());
                continue;
            }
            LabeledGraph gold = label_graph(g, pr.comments, pr, config.stability_window);
            docs.push_back(predict_report(g, rev->content, likelihood, topic, config.threshold, gold.labels, pr.id));
        }
    }
    std::sort(docs.begin(), docs.end(), [](const ReportDocument& a, const ReportDocument& b) {
        return std::tie(a.pr_id, a.file_path) < std::tie(b.pr_id, b.file_path);
    });
    return docs;
}

}  // namespace mcrg
