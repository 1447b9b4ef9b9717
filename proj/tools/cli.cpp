#include "cli.hpp"

#include <omp.h>

#include <cstdlib>
#include <functional>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "mtc/common/byte_io.hpp"
#include "mtc/common/digest.hpp"
#include "mtc/common/error.hpp"
#include "mtc/dataset/corpus.hpp"
#include "mtc/dataset/filters.hpp"
#include "mtc/dataset/manifest.hpp"
#include "mtc/dataset/store.hpp"
#include "mtc/eval/plugin.hpp"
#include "mtc/eval/protocols.hpp"
#include "mtc/eval/report.hpp"
#include "mtc/features/tensor_io.hpp"
#include "mtc/synth/planted.hpp"

namespace mtc::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kFallbackSeed = 42;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("MTC_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("MTC_SEED is not an unsigned integer: ") + env);
        }
    }
    return kFallbackSeed;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

/// Digest of the store file itself, so reports identify their input by content.
std::string file_digest(const fs::path& path) {
    const auto bytes = read_file_bytes(path);
    return to_hex(digest128(bytes));
}

// ---- options shared by the eval subcommands --------------------------------

struct ModelOptions {
    std::string model = "rf";
    std::size_t trees = 100;
    std::size_t feature_subsample = 0;
    std::optional<std::size_t> max_depth;
    std::size_t min_split = 2;
    std::uint32_t neighbors = 3;
    std::string plugin_exe;
    std::string arch;
    std::string plugin_config;
    std::string work_dir;
};

struct ReprOptions {
    std::string repr = "raw784";
    std::uint32_t m = 2;
    std::uint32_t n = 100;
    std::uint32_t p = 32;

    features::ReprSpec spec() const { return features::ReprSpec::parse(repr, m, n, p); }
};

void add_model_options(CLI::App* cmd, ModelOptions& o) {
    cmd->add_option("--model", o.model, "dt, rf, et, knn or external")
        ->check(CLI::IsMember({"dt", "rf", "et", "knn", "external"}))
        ->capture_default_str();
    cmd->add_option("--trees", o.trees, "Trees per forest (rf, et)")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--feature-subsample", o.feature_subsample, "Features tried per split; 0 = ceil(sqrt(d))")
        ->capture_default_str();
    cmd->add_option("--max-depth", o.max_depth, "Tree depth limit (default unlimited)");
    cmd->add_option("--min-split", o.min_split, "Minimum samples to split a node")->capture_default_str();
    cmd->add_option("--neighbors", o.neighbors, "k for knn")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--plugin-exe", o.plugin_exe, "External model executable (--model external)");
    cmd->add_option("--arch", o.arch, "Architecture name passed to the external model");
    cmd->add_option("--plugin-config", o.plugin_config, "Config file passed to the external model")
        ->check(CLI::ExistingFile);
    cmd->add_option("--work-dir", o.work_dir, "Scratch directory for external model files (default <out>.work)");
}

void add_repr_options(CLI::App* cmd, ReprOptions& o) {
    cmd->add_option("--repr", o.repr, "raw784, img28, deepmal, pktseq or stats")
        ->check(CLI::IsMember({"raw784", "img28", "deepmal", "pktseq", "stats"}))
        ->capture_default_str();
    cmd->add_option("--m", o.m, "deepmal: packets per session")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--n", o.n, "deepmal: bytes per packet")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--P", o.p, "pktseq: sequence length")->check(CLI::PositiveNumber)->capture_default_str();
}

std::unique_ptr<eval::ModelPlugin> make_model(const ModelOptions& o, const fs::path& out) {
    if (o.model == "external") {
        if (o.plugin_exe.empty() || o.arch.empty())
            throw std::invalid_argument("--model external needs --plugin-exe and --arch");
        const fs::path work = o.work_dir.empty() ? fs::path(out.string() + ".work") : fs::path(o.work_dir);
        std::optional<fs::path> cfg;
        if (!o.plugin_config.empty()) cfg = o.plugin_config;
        return std::make_unique<eval::ExternalPlugin>(o.plugin_exe, o.arch, work, cfg);
    }
    eval::NativeParams p;
    p.kind = eval::NativePlugin::parse_kind(o.model);
    p.n_trees = o.trees;
    p.feature_subsample = o.feature_subsample;
    p.max_depth = o.max_depth;
    p.min_samples_split = o.min_split;
    p.knn_k = o.neighbors;
    return std::make_unique<eval::NativePlugin>(p);
}

json repr_config(const features::ReprSpec& spec) {
    json j{{"name", spec.name()}};
    if (spec.kind == features::ReprKind::DeepMal) {
        j["m"] = spec.deepmal_packets;
        j["n"] = spec.deepmal_bytes;
    }
    if (spec.kind == features::ReprKind::PktSeq) j["P"] = spec.sequence_length;
    return j;
}

void emit_report(const json& body, const std::string& out) {
    const auto report = eval::make_report(body);
    eval::write_report(report, out);
    std::cout << eval::render_report(report);
    std::cerr << "report written to " << out << '\n';
}

// ---- subcommands -------------------------------------------------------------

struct IngestCmd {
    std::string manifest, out;
    double tcp_timeout = 300, udp_timeout = 300;

    void run() const {
        const auto m = dataset::DatasetManifest::load(manifest);
        const auto result = dataset::build_corpus(m, {tcp_timeout, udp_timeout});
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
        for (const auto& f : result.files) {
            std::cout << f.path << ": " << f.counters.frames << " frames, " << f.counters.accepted << " accepted, "
                      << f.counters.skipped_non_ip << " non-IP, " << f.counters.skipped_fragments << " fragments, "
                      << f.counters.skipped_other << " other, " << f.sessions << " sessions\n";
        }
        dataset::save_corpus(result.corpus, out);
        std::cout << result.corpus.size() << " sessions written to " << out << '\n';
    }
};

struct PreprocessCmd {
    std::string in, out;
    std::uint64_t min_payload = dataset::kDefaultMinPayload;
    bool keep_noise = false;
    bool balance = false;
    std::optional<std::size_t> min_family;
    std::uint64_t seed = 0;

    void run() const {
        auto corpus = dataset::load_corpus(in);
        const auto before = corpus.size();
        corpus = dataset::filter_min_payload(corpus, min_payload);
        std::cout << "min payload " << min_payload << ": " << before - corpus.size() << " removed\n";
        if (!keep_noise) {
            auto r = dataset::filter_noise(corpus);
            for (const auto& [rule, n] : r.removed)
                if (n) std::cout << "noise " << rule << ": " << n << " removed\n";
            corpus = std::move(r.corpus);
        }
        if (min_family) {
            const auto n = corpus.size();
            corpus = dataset::min_family_filter(corpus, *min_family);
            std::cout << "min family size " << *min_family << ": " << n - corpus.size() << " removed\n";
        }
        if (balance) {
            const auto n = corpus.size();
            corpus = dataset::balance_benign_malware(corpus, seed);
            std::cout << "balance (seed " << seed << "): " << n - corpus.size() << " removed\n";
        }
        dataset::save_corpus(corpus, out);
        std::cout << corpus.size() << " sessions written to " << out << '\n';
    }
};

struct StatsCmd {
    std::string in;
    bool as_json = false;

    void run() const {
        const auto corpus = dataset::load_corpus(in);
        const auto s = dataset::compute_stats(corpus);
        if (as_json) {
            json j{{"dataset", corpus.dataset_name},
                   {"benign", s.benign},
                   {"malware", s.malware},
                   {"benign_tls_share", s.tls_share(dataset::Label::Benign)},
                   {"malware_tls_share", s.tls_share(dataset::Label::Malware)},
                   {"families", s.per_family}};
            std::cout << j.dump(2) << '\n';
            return;
        }
        char buf[64];
        std::cout << "dataset " << corpus.dataset_name << '\n';
        std::snprintf(buf, sizeof buf, "%.2f%%", s.tls_share(dataset::Label::Benign) * 100);
        std::cout << "benign  " << s.benign << " sessions, TLS " << buf << '\n';
        std::snprintf(buf, sizeof buf, "%.2f%%", s.tls_share(dataset::Label::Malware) * 100);
        std::cout << "malware " << s.malware << " sessions, TLS " << buf << '\n';
        for (const auto& [family, n] : s.per_family) std::cout << "  " << family << ": " << n << '\n';
    }
};

struct FeaturizeCmd {
    std::string in, out_x, out_y, task = "binary";
    ReprOptions repr;

    void run() const {
        const auto corpus = dataset::load_corpus(in);
        const auto t = eval::parse_task(task);
        const auto classes = eval::task_classes(corpus, t);
        const auto batch = eval::make_batch(corpus, repr.spec(), t, classes);
        features::write_tensor_file(batch.x, out_x);
        std::vector<features::LabelRow> rows;
        rows.reserve(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) rows.push_back({batch.ids[i], batch.y[i], batch.families[i]});
        features::write_label_file(rows, out_y);
        std::cout << batch.size() << " rows of " << batch.x.row_size() << " features; classes:";
        for (std::size_t c = 0; c < classes.size(); ++c) std::cout << ' ' << c << '=' << classes[c];
        std::cout << '\n';
    }
};

struct EvalCommon {
    std::string in, out, predictions;
    std::uint64_t seed = 0;
    ModelOptions model;
    ReprOptions repr;

    json base_config(const char* protocol, const std::unique_ptr<eval::ModelPlugin>& plugin) const {
        return {{"protocol", protocol},
                {"model", plugin->config()},
                {"repr", repr_config(repr.spec())},
                {"seed", seed}};
    }
};

void add_eval_common(CLI::App* cmd, EvalCommon& c, bool with_input = true) {
    if (with_input) cmd->add_option("--in", c.in, "Corpus store")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "Report file (JSON)")->required();
    cmd->add_option("--seed", c.seed, "Seed (default $MTC_SEED or 42)");
    add_model_options(cmd, c.model);
    add_repr_options(cmd, c.repr);
}

struct CvCmd : EvalCommon {
    std::string task = "binary";
    std::uint32_t folds = 5;

    void run() const {
        const auto corpus = dataset::load_corpus(in);
        auto plugin = make_model(model, out);
        const auto t = eval::parse_task(task);
        json config = base_config("cv", plugin);
        config["input"] = {{"dataset", corpus.dataset_name}, {"digest", file_digest(in)}};
        config["task"] = task;
        config["folds"] = folds;
        const auto result = eval::run_cv(corpus, *plugin, repr.spec(), t, folds, seed);
        if (!predictions.empty()) eval::write_predictions_csv(result.predictions, result.classes, predictions);
        emit_report(eval::cv_body(result, config, seed), out);
    }
};

struct ZeroDayCmd : EvalCommon {
    std::vector<std::string> families;
    bool all_families = false;
    bool two_sided = false;

    void run() const {
        const auto corpus = dataset::load_corpus(in);
        auto plugin = make_model(model, out);
        auto targets = families;
        if (all_families) targets = dataset::malware_families(corpus);
        if (targets.empty()) throw std::invalid_argument("give --family or --all-families");
        json config = base_config("zero-day", plugin);
        config["input"] = {{"dataset", corpus.dataset_name}, {"digest", file_digest(in)}};
        config["families"] = targets;
        config["two_sided"] = two_sided;

        std::vector<eval::ZeroDayResult> results;
        std::vector<eval::SamplePrediction> preds;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            eval::ZeroDayOptions zo{two_sided, derive_seed(seed, i)};
            results.push_back(eval::run_zero_day(corpus, *plugin, repr.spec(), targets[i], zo));
            for (auto p : results.back().predictions) {
                p.fold = static_cast<int>(i);
                preds.push_back(std::move(p));
            }
        }
        if (!predictions.empty()) {
            const std::vector<std::string> classes = {"benign", "malware"};
            eval::write_predictions_csv(preds, classes, predictions);
        }
        emit_report(eval::zero_day_body(results, config, seed), out);
    }
};

struct IncrementalCmd : EvalCommon {
    std::string order, preset, task = "both";
    std::uint32_t folds = 5;

    void run() const {
        const auto corpus = dataset::load_corpus(in);
        auto plugin = make_model(model, out);
        std::vector<std::string> fam;
        if (preset == "mtab") fam = eval::mtab_family_order();
        else if (preset == "ustcb") fam = eval::ustcb_family_order();
        else if (!order.empty()) fam = split_list(order);
        else fam = dataset::malware_families(corpus);
        eval::IncrementalTask t = eval::IncrementalTask::Both;
        if (task == "binary") t = eval::IncrementalTask::Binary;
        else if (task == "family") t = eval::IncrementalTask::Family;
        json config = base_config("incremental", plugin);
        config["input"] = {{"dataset", corpus.dataset_name}, {"digest", file_digest(in)}};
        config["order"] = fam;
        config["task"] = task;
        config["folds"] = folds;
        const auto steps = eval::run_incremental(corpus, *plugin, repr.spec(), fam, t, folds, seed);
        emit_report(eval::incremental_body(steps, config, seed), out);
    }
};

struct CrossCmd : EvalCommon {
    std::string train, test;
    std::vector<std::string> pairs;

    void run() const {
        const auto train_c = dataset::load_corpus(train);
        const auto test_c = dataset::load_corpus(test);
        auto plugin = make_model(model, out);
        json config = base_config("cross", plugin);
        config["train"] = {{"dataset", train_c.dataset_name}, {"digest", file_digest(train)}};
        config["test"] = {{"dataset", test_c.dataset_name}, {"digest", file_digest(test)}};
        config["pairs"] = pairs;
        std::vector<eval::CrossDatasetResult> results;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto colon = pairs[i].find(':');
            const std::string a = pairs[i].substr(0, colon);
            const std::string b = colon == std::string::npos ? a : pairs[i].substr(colon + 1);
            results.push_back(eval::run_cross_dataset(train_c, test_c, *plugin, repr.spec(), a, b, derive_seed(seed, i)));
        }
        emit_report(eval::cross_body(results, config, seed), out);
    }
};

struct ReportCmd {
    std::string path;
    bool as_json = false;

    void run() const {
        const auto report = eval::read_report(path);
        if (as_json) std::cout << report.dump(2) << '\n';
        else std::cout << eval::render_report(report);
    }
};

struct SynthCmd {
    std::string out;
    synth::PlantedOptions options;
    bool no_noise = false;

    void run() {
        options.noise = !no_noise;
        const auto c = synth::write_planted_corpus(out, options);
        std::cout << c.class_sessions << " class sessions and " << c.noise_sessions << " noise sessions in "
                  << c.captures.size() << " captures; manifest " << c.manifest.string() << '\n';
    }
};

} // namespace

int dispatch(int argc, char** argv) {
    CLI::App app{"Encrypted-traffic malware classification pipeline"};
    app.name("mtc");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    int jobs = 0;
    app.add_option("--jobs", jobs, "Cap on worker threads (default: all cores)")->check(CLI::NonNegativeNumber);

    std::function<void()> action;

    IngestCmd ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Parse the captures listed in a manifest into a corpus store");
    c_ingest->add_option("--manifest", ingest.manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
    c_ingest->add_option("--out", ingest.out, "Corpus store to write")->required();
    c_ingest->add_option("--tcp-timeout", ingest.tcp_timeout, "TCP idle timeout, seconds")->capture_default_str();
    c_ingest->add_option("--udp-timeout", ingest.udp_timeout, "UDP idle timeout, seconds")->capture_default_str();
    c_ingest->callback([&] { action = [&] { ingest.run(); }; });

    PreprocessCmd prep;
    auto* c_prep = app.add_subcommand("preprocess", "Filter and balance a corpus store");
    c_prep->add_option("--in", prep.in, "Input corpus store")->required()->check(CLI::ExistingFile);
    c_prep->add_option("--out", prep.out, "Output corpus store")->required();
    c_prep->add_option("--min-payload", prep.min_payload, "Drop sessions with fewer payload bytes")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    c_prep->add_flag("--keep-noise", prep.keep_noise, "Skip the DNS/SNMP/LLMNR/NetBIOS/SSDP/DHCP/broadcast denylist");
    c_prep->add_option("--min-family", prep.min_family, "Drop malware families with fewer sessions");
    c_prep->add_flag("--balance", prep.balance, "Downsample the larger of benign/malware to equal counts");
    c_prep->add_option("--seed", prep.seed, "Balancing seed (default $MTC_SEED or 42)");
    c_prep->callback([&] { action = [&] { prep.run(); }; });

    StatsCmd stats;
    auto* c_stats = app.add_subcommand("stats", "Session counts, per-family counts and TLS share");
    c_stats->add_option("--in", stats.in, "Corpus store")->required()->check(CLI::ExistingFile);
    c_stats->add_flag("--json", stats.as_json, "Print JSON instead of text");
    c_stats->callback([&] { action = [&] { stats.run(); }; });

    FeaturizeCmd feat;
    auto* c_feat = app.add_subcommand("featurize", "Write feature tensors and labels for a corpus store");
    c_feat->add_option("--in", feat.in, "Corpus store")->required()->check(CLI::ExistingFile);
    c_feat->add_option("--out-x", feat.out_x, "Tensor file to write")->required();
    c_feat->add_option("--out-y", feat.out_y, "Label file to write")->required();
    c_feat->add_option("--task", feat.task, "binary or family")
        ->check(CLI::IsMember({"binary", "family"}))
        ->capture_default_str();
    add_repr_options(c_feat, feat.repr);
    c_feat->callback([&] { action = [&] { feat.run(); }; });

    auto* c_eval = app.add_subcommand("eval", "Run an evaluation protocol and write a report");
    c_eval->require_subcommand(1);

    CvCmd cv;
    auto* c_cv = c_eval->add_subcommand("cv", "Stratified k-fold cross-validation");
    add_eval_common(c_cv, cv);
    c_cv->add_option("--task", cv.task, "binary or family")->check(CLI::IsMember({"binary", "family"}))->capture_default_str();
    c_cv->add_option("--folds", cv.folds, "Number of folds")->check(CLI::Range(2u, 1000u))->capture_default_str();
    c_cv->add_option("--predictions", cv.predictions, "Also write per-sample predictions (CSV)");
    c_cv->callback([&] { action = [&] { cv.run(); }; });

    ZeroDayCmd zd;
    auto* c_zd = c_eval->add_subcommand("zero-day", "Leave-one-family-out binary test");
    add_eval_common(c_zd, zd);
    c_zd->add_option("--family", zd.families, "Family to hold out (repeatable)");
    c_zd->add_flag("--all-families", zd.all_families, "Hold out every family in turn");
    c_zd->add_flag("--two-sided", zd.two_sided, "Also hold out benign sessions and score them");
    c_zd->add_option("--predictions", zd.predictions, "Also write per-sample predictions (CSV)");
    c_zd->callback([&] { action = [&] { zd.run(); }; });

    IncrementalCmd inc;
    auto* c_inc = c_eval->add_subcommand("incremental", "Add families one at a time and track accuracy");
    add_eval_common(c_inc, inc);
    c_inc->add_option("--order", inc.order, "Comma-separated family order (default: sorted corpus families)");
    c_inc->add_option("--preset", inc.preset, "Published family order: mtab or ustcb")
        ->check(CLI::IsMember({"mtab", "ustcb"}));
    c_inc->add_option("--task", inc.task, "binary, family or both")
        ->check(CLI::IsMember({"binary", "family", "both"}))
        ->capture_default_str();
    c_inc->add_option("--folds", inc.folds, "Number of folds")->check(CLI::Range(2u, 1000u))->capture_default_str();
    c_inc->callback([&] { action = [&] { inc.run(); }; });

    CrossCmd cross;
    auto* c_cross = c_eval->add_subcommand("cross", "Train on one corpus, test a paired family of another");
    add_eval_common(c_cross, cross, false);
    c_cross->add_option("--train", cross.train, "Training corpus store")->required()->check(CLI::ExistingFile);
    c_cross->add_option("--test", cross.test, "Test corpus store")->required()->check(CLI::ExistingFile);
    c_cross->add_option("--pair", cross.pairs, "TRAIN_FAMILY:TEST_FAMILY (repeatable)")->required();
    c_cross->callback([&] { action = [&] { cross.run(); }; });

    ReportCmd rep;
    auto* c_rep = app.add_subcommand("report", "Render a stored report");
    c_rep->add_option("path", rep.path, "Report file")->required()->check(CLI::ExistingFile);
    c_rep->add_flag("--json", rep.as_json, "Print the raw JSON");
    c_rep->callback([&] { action = [&] { rep.run(); }; });

    SynthCmd syn;
    auto* c_syn = app.add_subcommand("synth", "Generate a planted-signal capture corpus");
    c_syn->group("");
    c_syn->add_option("--out", syn.out, "Output directory")->required();
    c_syn->add_option("--sessions-per-class", syn.options.sessions_per_class, "Sessions per class")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    c_syn->add_option("--seed", syn.options.seed, "Generator seed")->capture_default_str();
    c_syn->add_option("--dataset-name", syn.options.dataset_name, "Dataset name in the manifest")->capture_default_str();
    c_syn->add_flag("--no-noise", syn.no_noise, "Only class sessions, no short or denylisted traffic");
    c_syn->callback([&] { action = [&] { syn.run(); }; });

    try {
        const auto seed = default_seed();
        prep.seed = cv.seed = zd.seed = inc.seed = cross.seed = seed;
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    if (jobs > 0) omp_set_num_threads(jobs);

    try {
        action();
        return kExitOk;
    } catch (const PluginError& e) {
        std::cerr << "plugin error: " << e.what() << '\n';
        return kExitPlugin;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}

} // namespace mtc::cli
