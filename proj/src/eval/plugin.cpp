#include "mtc/eval/plugin.hpp"

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mtc/classic/knn.hpp"
#include "mtc/classic/tree.hpp"
#include "mtc/common/digest.hpp"
#include "mtc/common/error.hpp"
#include "mtc/features/tensor_io.hpp"

extern char** environ;

namespace mtc::eval {

LabeledBatch LabeledBatch::select(std::span<const std::size_t> rows) const {
    LabeledBatch out;
    out.x = x.select(rows);
    out.y.reserve(rows.size());
    out.ids.reserve(rows.size());
    out.families.reserve(rows.size());
    for (auto r : rows) {
        out.y.push_back(y[r]);
        out.ids.push_back(ids[r]);
        out.families.push_back(families[r]);
    }
    return out;
}

// ---- native ---------------------------------------------------------------

NativeKind NativePlugin::parse_kind(const std::string& name) {
    if (name == "dt") return NativeKind::DecisionTree;
    if (name == "rf") return NativeKind::RandomForest;
    if (name == "et") return NativeKind::ExtraTrees;
    if (name == "knn") return NativeKind::Knn;
    throw std::invalid_argument("unknown native model '" + name + "' (expected dt, rf, et, knn)");
}

std::string NativePlugin::name() const {
    switch (params_.kind) {
    case NativeKind::DecisionTree: return "dt";
    case NativeKind::RandomForest: return "rf";
    case NativeKind::ExtraTrees: return "et";
    case NativeKind::Knn: return "knn";
    }
    return "?";
}

nlohmann::json NativePlugin::config() const {
    nlohmann::json j{{"model", name()}};
    switch (params_.kind) {
    case NativeKind::Knn:
        j["k"] = params_.knn_k;
        break;
    case NativeKind::RandomForest:
    case NativeKind::ExtraTrees:
        j["n_trees"] = params_.n_trees;
        j["feature_subsample"] = params_.feature_subsample;
        [[fallthrough]];
    case NativeKind::DecisionTree:
        j["max_depth"] = params_.max_depth ? nlohmann::json(*params_.max_depth) : nlohmann::json(nullptr);
        j["min_samples_split"] = params_.min_samples_split;
        break;
    }
    return j;
}

classic::ProbabilityRows NativePlugin::train_and_predict(const LabeledBatch& train, const LabeledBatch& test,
                                                         std::uint32_t n_classes, std::uint64_t seed,
                                                         const std::string&) {
    const classic::TreeParams tree{params_.max_depth, params_.min_samples_split};
    switch (params_.kind) {
    case NativeKind::DecisionTree: {
        const auto model = classic::fit_tree(train.x, train.y, tree, n_classes);
        classic::ProbabilityRows out;
        out.reserve(test.size());
        for (std::size_t i = 0; i < test.size(); ++i) {
            const auto p = model.predict_proba(test.x.row(i));
            out.emplace_back(p.begin(), p.end());
        }
        return out;
    }
    case NativeKind::RandomForest:
    case NativeKind::ExtraTrees: {
        classic::ForestParams fp;
        fp.mode = params_.kind == NativeKind::RandomForest ? classic::ForestMode::RandomForest
                                                           : classic::ForestMode::ExtraTrees;
        fp.n_trees = params_.n_trees;
        fp.feature_subsample = params_.feature_subsample;
        fp.tree = tree;
        fp.seed = seed;
        const auto model = classic::fit_forest(train.x, train.y, fp, n_classes);
        return classic::predict_forest_batch(model, test.x);
    }
    case NativeKind::Knn: {
        const classic::KnnModel model(train.x, train.y, params_.knn_k, n_classes);
        return classic::knn_predict_batch(model, test.x);
    }
    }
    return {};
}

// ---- external ---------------------------------------------------------------

int run_process(const std::vector<std::string>& argv) {
    if (argv.empty()) throw PluginError("empty command line");
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    // keep the harness's stdout clean for its own output
    posix_spawn_file_actions_adddup2(&actions, STDERR_FILENO, STDOUT_FILENO);
    pid_t pid = 0;
    const int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) throw PluginError("cannot start " + argv[0] + ": " + std::strerror(rc));

    int status = 0;
    while (waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR) throw PluginError("waitpid failed for " + argv[0]);
    }
    if (WIFSIGNALED(status)) throw PluginError(argv[0] + " killed by signal " + std::to_string(WTERMSIG(status)));
    return WEXITSTATUS(status);
}

void write_prediction_file(const std::filesystem::path& path, std::span<const std::string> ids,
                           const classic::ProbabilityRows& probs, std::uint32_t n_classes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write prediction file " + path.string());
    out << "session_id";
    for (std::uint32_t c = 0; c < n_classes; ++c) out << ",p_class" << c;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out << ids[i];
        for (double p : probs[i]) {
            std::snprintf(buf, sizeof buf, "%.17g", p);
            out << ',' << buf;
        }
        out << '\n';
    }
}

PredictionFile read_prediction_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PluginError("plugin produced no prediction file at " + path.string());
    PredictionFile pf;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("session_id", 0) == 0) continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 2) throw PluginError("malformed prediction line: " + line);
        pf.ids.push_back(cells[0]);
        std::vector<double> row;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double v = 0;
            const char* b = cells[c].data();
            const char* e = b + cells[c].size();
            if (auto [p, ec] = std::from_chars(b, e, v); ec != std::errc{} || p != e)
                throw PluginError("non-numeric probability in line: " + line);
            row.push_back(v);
        }
        pf.probs.push_back(std::move(row));
    }
    return pf;
}

ExternalPlugin::ExternalPlugin(std::filesystem::path executable, std::string arch, std::filesystem::path work_dir,
                               std::optional<std::filesystem::path> config_file)
    : exe_(std::move(executable)), arch_(std::move(arch)), work_dir_(std::move(work_dir)),
      config_file_(std::move(config_file)) {}

nlohmann::json ExternalPlugin::config() const {
    nlohmann::json j{{"model", "external"}, {"arch", arch_}, {"executable", exe_.filename().string()}};
    if (config_file_) {
        std::ifstream in(*config_file_, std::ios::binary);
        std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        j["config_digest"] = to_hex(digest128(body));
    }
    return j;
}

classic::ProbabilityRows ExternalPlugin::train_and_predict(const LabeledBatch& train, const LabeledBatch& test,
                                                           std::uint32_t n_classes, std::uint64_t seed,
                                                           const std::string& context) {
    const auto dir = work_dir_ / ("run" + std::to_string(invocation_++));
    std::filesystem::create_directories(dir);
    const auto train_x = dir / "train.ftns";
    const auto train_y = dir / "train.labels";
    const auto test_x = dir / "test.ftns";
    const auto model = dir / "model.bin";
    const auto preds = dir / "predictions.csv";

    features::write_tensor_file(train.x, train_x);
    std::vector<features::LabelRow> rows;
    rows.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) rows.push_back({train.ids[i], train.y[i], train.families[i]});
    features::write_label_file(rows, train_y);
    features::write_tensor_file(test.x, test_x);
    {
        std::ofstream ids(test_x.string() + ".ids", std::ios::binary | std::ios::trunc);
        for (const auto& id : test.ids) ids << id << '\n';
    }

    std::vector<std::string> train_cmd = {exe_.string(), "train", "--arch", arch_, "--train-x", train_x.string(),
                                          "--train-y", train_y.string(), "--model-out", model.string(),
                                          "--seed", std::to_string(seed)};
    if (config_file_) {
        train_cmd.push_back("--config");
        train_cmd.push_back(config_file_->string());
    }
    if (const int rc = run_process(train_cmd); rc != 0)
        throw PluginError(context + ": plugin train exited with status " + std::to_string(rc));

    const std::vector<std::string> predict_cmd = {exe_.string(), "predict", "--model-in", model.string(),
                                                  "--x", test_x.string(), "--out", preds.string()};
    if (const int rc = run_process(predict_cmd); rc != 0)
        throw PluginError(context + ": plugin predict exited with status " + std::to_string(rc));

    auto pf = read_prediction_file(preds);
    if (pf.probs.size() != test.size())
        throw PluginError(context + ": plugin returned " + std::to_string(pf.probs.size()) + " rows for " +
                          std::to_string(test.size()) + " samples");
    for (std::size_t i = 0; i < pf.probs.size(); ++i) {
        if (pf.ids[i] != test.ids[i] && pf.ids[i] != std::to_string(i))
            throw PluginError(context + ": prediction row " + std::to_string(i) + " is for '" + pf.ids[i] +
                              "', expected '" + test.ids[i] + "'");
        auto& row = pf.probs[i];
        if (row.size() > n_classes)
            throw PluginError(context + ": plugin returned " + std::to_string(row.size()) + " classes, expected " +
                              std::to_string(n_classes));
        // plugins that inferred fewer classes from their training labels
        row.resize(n_classes, 0.0);
    }
    return std::move(pf.probs);
}

} // namespace mtc::eval
