#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "mtc/classic/common.hpp"
#include "mtc/classic/forest.hpp"
#include "mtc/features/tensor.hpp"

namespace mtc::eval {

/// Feature rows with their class targets and session identities.
struct LabeledBatch {
    features::TensorBatch x;
    std::vector<std::uint32_t> y;
    std::vector<std::string> ids;      ///< hex session ids
    std::vector<std::string> families; ///< family name per row

    std::size_t size() const { return y.size(); }
    LabeledBatch select(std::span<const std::size_t> rows) const;
};

/// Anything that can be trained on one batch and score another. Returns one
/// probability row of width n_classes per test sample.
class ModelPlugin {
public:
    virtual ~ModelPlugin() = default;
    virtual std::string name() const = 0;
    /// Normalized configuration; part of every report fingerprint.
    virtual nlohmann::json config() const = 0;
    /// `context` names the run (e.g. "cv fold 3") for diagnostics and scratch paths.
    virtual classic::ProbabilityRows train_and_predict(const LabeledBatch& train, const LabeledBatch& test,
                                                       std::uint32_t n_classes, std::uint64_t seed,
                                                       const std::string& context) = 0;
};

enum class NativeKind { DecisionTree, RandomForest, ExtraTrees, Knn };

struct NativeParams {
    NativeKind kind = NativeKind::RandomForest;
    std::size_t n_trees = 100;
    std::size_t feature_subsample = 0; ///< 0 = ceil(sqrt(d))
    std::optional<std::size_t> max_depth;
    std::size_t min_samples_split = 2;
    std::uint32_t knn_k = 3;
};

/// In-process DT / RF / ExtraTrees / KNN.
class NativePlugin : public ModelPlugin {
public:
    explicit NativePlugin(NativeParams params) : params_(params) {}

    std::string name() const override;
    nlohmann::json config() const override;
    classic::ProbabilityRows train_and_predict(const LabeledBatch& train, const LabeledBatch& test,
                                               std::uint32_t n_classes, std::uint64_t seed,
                                               const std::string& context) override;

    /// "dt", "rf", "et" or "knn"; throws std::invalid_argument.
    static NativeKind parse_kind(const std::string& name);

private:
    NativeParams params_;
};

/// External model executable driven through files and exit codes:
///
///     <exe> train   --arch <name> --train-x <ftns> --train-y <labels> --model-out <path> --seed <u64> [--config <file>]
///     <exe> predict --model-in <path> --x <ftns> --out <pred-file>
///
/// The prediction file holds a header "session_id,p_class0,...,p_class{C-1}"
/// followed by one "session_id,p0,p1,..." line per input row, in input order.
/// Session ids of the rows in `--x` are listed one per line in "<x>.ids";
/// a plugin may echo them or use the 0-based row number instead.
class ExternalPlugin : public ModelPlugin {
public:
    ExternalPlugin(std::filesystem::path executable, std::string arch, std::filesystem::path work_dir,
                   std::optional<std::filesystem::path> config_file = std::nullopt);

    std::string name() const override { return "external:" + arch_; }
    nlohmann::json config() const override;
    classic::ProbabilityRows train_and_predict(const LabeledBatch& train, const LabeledBatch& test,
                                               std::uint32_t n_classes, std::uint64_t seed,
                                               const std::string& context) override;

private:
    std::filesystem::path exe_;
    std::string arch_;
    std::filesystem::path work_dir_;
    std::optional<std::filesystem::path> config_file_;
    std::uint64_t invocation_ = 0;
};

/// Runs a program with the given argv (no shell) and returns its exit status;
/// the child's stdout is redirected to our stderr. Throws PluginError when
/// the program cannot be started or dies from a signal.
int run_process(const std::vector<std::string>& argv);

/// Writes the plugin prediction file.
void write_prediction_file(const std::filesystem::path& path, std::span<const std::string> ids,
                           const classic::ProbabilityRows& probs, std::uint32_t n_classes);

struct PredictionFile {
    std::vector<std::string> ids;
    classic::ProbabilityRows probs;
};
/// Throws PluginError on malformed content.
PredictionFile read_prediction_file(const std::filesystem::path& path);

} // namespace mtc::eval
