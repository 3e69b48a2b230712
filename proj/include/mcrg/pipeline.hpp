#pragma once

#include "mcrg/corpus.hpp"
#include "mcrg/graphlearn.hpp"
#include "mcrg/labeling.hpp"
#include "mcrg/metrics.hpp"
#include "mcrg/report.hpp"

#include <json.hpp>

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace mcrg {

// Everything a pipeline stage needs, loaded from one JSON file and then
// overridden by command-line flags. `seed` drives the split and training;
// `task` is copied into the model config.
struct RunConfig {
    Task task = Task::likelihood;
    std::uint64_t seed = 0;
    double ratio = 0.8;
    double threshold = 0.5;
    int stability_window = 2;
    ModelConfig model;
    TrainConfig train;
    // QUALITY: LIKELIHOOD checkpoint to use as the frozen encoder. When
    // empty, one is trained on the same split first.
    std::string encoder_checkpoint;
    std::string pseudonym_salt = "mcr-graph";
    int diff_context = 3;

    // Copies task and seed into the nested configs, then validates.
    void resolve();
};

// Unknown keys are rejected with SchemaError.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);

std::string corpus_digest(const ReviewCorpus& corpus);
std::string id_set_digest(const std::set<std::string>& ids);

// PRs of `corpus` whose id is in `ids`, in corpus order.
ReviewCorpus corpus_subset(const ReviewCorpus& corpus, const std::set<std::string>& ids);

// Throws ConfigMismatch unless every PR of `corpus` is on exactly one side
// of `split` and the split names no other PR.
void check_split_matches(const ReviewCorpus& corpus, const DatasetSplit& split);

// Labels (or quality targets) of the given PRs for `config.task`.
TaskDataset build_dataset(const ReviewCorpus& corpus, const std::set<std::string>& pr_ids, const RunConfig& config);

// Trains on split.train_pr_ids only and records the split and corpus
// digests plus the resolved config in the checkpoint.
Checkpoint train_run(const ReviewCorpus& corpus, const DatasetSplit& split, const RunConfig& config);

// Throws ConfigMismatch unless `split` is the split the checkpoint was
// trained on.
void check_split_provenance(const Checkpoint& checkpoint, const DatasetSplit& split);

// Metrics on split.test_pr_ids only, for the checkpoint's task.
MetricsReport evaluate_run(const Checkpoint& checkpoint, const ReviewCorpus& corpus, const DatasetSplit& split,
                           const RunConfig& config);

// Reports for the last revision of every file of the selected PRs, sorted
// by (pr_id, file_path). Unparsable revisions are skipped with a warning.
std::vector<ReportDocument> predict_run(const ReviewCorpus& corpus, const std::set<std::string>& pr_ids,
                                        const Model& likelihood, const Model* topic, const RunConfig& config);

}  // namespace mcrg
