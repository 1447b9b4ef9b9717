#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtc/dataset/corpus.hpp"
#include "mtc/eval/folds.hpp"
#include "mtc/eval/metrics.hpp"
#include "mtc/eval/plugin.hpp"
#include "mtc/features/tensor.hpp"

namespace mtc::eval {

enum class Task { Binary, Family };

std::string to_string(Task t);
Task parse_task(const std::string& name);

/// Class names for a task: {"benign", "malware"} or the sorted malware families.
std::vector<std::string> task_classes(const dataset::LabeledCorpus& corpus, Task task);

/// Features + targets for a corpus under a task. The family task keeps
/// malware sessions only.
LabeledBatch make_batch(const dataset::LabeledCorpus& corpus, const features::ReprSpec& repr, Task task,
                        const std::vector<std::string>& classes);

struct SamplePrediction {
    std::string session_id;
    int fold = -1;
    std::uint32_t truth = 0;
    std::uint32_t predicted = 0;
    std::vector<double> probs;
};

struct CvResult {
    Task task = Task::Binary;
    std::vector<std::string> classes;
    FoldAssignment folds;
    std::vector<MetricsReport> fold_reports;
    MetricsReport mean;
    std::vector<SamplePrediction> predictions; ///< grouped by fold, fold order
};

/// Stratified k-fold cross-validation. Fold membership depends only on the
/// corpus, task and seed, so every model sees the same folds; the model seed
/// of fold f is derive_seed(seed, f).
///
/// Throws ClassTooSmall (also for a family task with fewer than two
/// families) and PluginError carrying the fold context.
CvResult run_cv(const dataset::LabeledCorpus& corpus, ModelPlugin& model, const features::ReprSpec& repr,
                Task task, std::uint32_t k, std::uint64_t seed);

struct ZeroDayResult {
    std::string family;
    double accuracy = 0; ///< share of test sessions classified correctly
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::size_t held_out_benign = 0;
    std::vector<SamplePrediction> predictions;
};

struct ZeroDayOptions {
    /// Also hold out as many benign sessions as the family has (seeded) and
    /// score both sides.
    bool two_sided = false;
    std::uint64_t seed = 0;
};

/// Leave-one-family-out binary test: train on all benign plus every other
/// family, test on the held-out family. Verifies on every run that no test
/// session or held-out-family session reaches the training set.
///
/// Throws UnknownFamily.
ZeroDayResult run_zero_day(const dataset::LabeledCorpus& corpus, ModelPlugin& model, const features::ReprSpec& repr,
                           const std::string& family, const ZeroDayOptions& options = {});

enum class IncrementalTask { Binary, Family, Both };

struct IncrementalStep {
    std::size_t step = 0; ///< 1-based: number of families included
    std::vector<std::string> families;
    std::optional<double> binary_accuracy;
    std::optional<double> family_accuracy;
};

/// Adds families one at a time in `order`. Each binary step re-balances
/// benign against the current malware total (seed derived per step) and
/// runs k-fold CV; each family step runs k-fold CV over the included
/// families, except step 1 which is a one-class problem scored 1.0.
/// Throws UnknownFamily.
std::vector<IncrementalStep> run_incremental(const dataset::LabeledCorpus& corpus, ModelPlugin& model,
                                             const features::ReprSpec& repr, const std::vector<std::string>& order,
                                             IncrementalTask task, std::uint32_t k, std::uint64_t seed);

struct CrossDatasetResult {
    std::string train_family;
    std::string test_family;
    double accuracy = 0; ///< share of the test family's sessions flagged malware
    std::size_t train_size = 0;
    std::size_t test_size = 0;
};

/// Binary model trained on all of `train`; scored on the `test_family`
/// sessions of `test`. Throws UnknownFamily if either family is missing.
CrossDatasetResult run_cross_dataset(const dataset::LabeledCorpus& train, const dataset::LabeledCorpus& test,
                                     ModelPlugin& model, const features::ReprSpec& repr,
                                     const std::string& train_family, const std::string& test_family,
                                     std::uint64_t seed);

/// The published family orders used for the increase-malware runs.
const std::vector<std::string>& mtab_family_order();
const std::vector<std::string>& ustcb_family_order();

} // namespace mtc::eval
