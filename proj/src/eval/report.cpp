#include "mtc/eval/report.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "mtc/common/digest.hpp"
#include "mtc/common/error.hpp"

namespace mtc::eval {

using nlohmann::json;

std::string config_fingerprint(const json& config) { return to_hex(digest128(config.dump())); }

json metrics_to_json(const MetricsReport& r) {
    json per_class = json::array();
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const auto& m = r.per_class[c];
        per_class.push_back({{"class", r.confusion.classes.at(c)},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"accuracy", m.accuracy},
                             {"support", m.support}});
    }
    json j{{"accuracy", r.accuracy},
           {"macro_precision", r.macro_precision},
           {"macro_recall", r.macro_recall},
           {"macro_f1", r.macro_f1},
           {"per_class", per_class},
           {"confusion", r.confusion.counts}};
    if (r.fold >= 0) j["fold"] = r.fold;
    return j;
}

namespace {

json header(const char* protocol, const json& config, std::uint64_t seed) {
    return {{"protocol", protocol}, {"config", config}, {"fingerprint", config_fingerprint(config)}, {"seed", seed}};
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", v * 100.0);
    return buf;
}

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

void render_metrics(std::ostringstream& out, const json& m) {
    out << "  accuracy " << pct(m.at("accuracy").get<double>()) << "  macro P/R/F1 "
        << fixed(m.at("macro_precision").get<double>()) << " / " << fixed(m.at("macro_recall").get<double>())
        << " / " << fixed(m.at("macro_f1").get<double>()) << '\n';
    for (const auto& c : m.at("per_class")) {
        out << "    " << c.at("class").get<std::string>() << ": precision " << fixed(c.at("precision").get<double>())
            << " recall " << fixed(c.at("recall").get<double>()) << " f1 " << fixed(c.at("f1").get<double>())
            << " accuracy " << fixed(c.at("accuracy").get<double>()) << " support "
            << c.at("support").get<std::uint64_t>() << '\n';
    }
}

} // namespace

json cv_body(const CvResult& result, const json& config, std::uint64_t seed) {
    json body = header("cv", config, seed);
    body["task"] = to_string(result.task);
    body["classes"] = result.classes;
    body["k"] = result.folds.k;
    json folds = json::array();
    for (const auto& f : result.fold_reports) folds.push_back(metrics_to_json(f));
    body["folds"] = std::move(folds);
    body["mean"] = metrics_to_json(result.mean);
    return body;
}

json zero_day_body(std::span<const ZeroDayResult> results, const json& config, std::uint64_t seed) {
    json body = header("zero-day", config, seed);
    json rows = json::array();
    double sum = 0;
    for (const auto& r : results) {
        rows.push_back({{"family", r.family},
                        {"accuracy", r.accuracy},
                        {"train_size", r.train_size},
                        {"test_size", r.test_size},
                        {"held_out_benign", r.held_out_benign}});
        sum += r.accuracy;
    }
    body["families"] = std::move(rows);
    body["mean_accuracy"] = results.empty() ? 0.0 : sum / static_cast<double>(results.size());
    return body;
}

json incremental_body(std::span<const IncrementalStep> steps, const json& config, std::uint64_t seed) {
    json body = header("incremental", config, seed);
    json rows = json::array();
    for (const auto& s : steps) {
        json row{{"step", s.step}, {"families", s.families}};
        row["binary_accuracy"] = s.binary_accuracy ? json(*s.binary_accuracy) : json(nullptr);
        row["family_accuracy"] = s.family_accuracy ? json(*s.family_accuracy) : json(nullptr);
        rows.push_back(std::move(row));
    }
    body["steps"] = std::move(rows);
    return body;
}

json cross_body(std::span<const CrossDatasetResult> results, const json& config, std::uint64_t seed) {
    json body = header("cross", config, seed);
    json rows = json::array();
    for (const auto& r : results) {
        rows.push_back({{"train_family", r.train_family},
                        {"test_family", r.test_family},
                        {"accuracy", r.accuracy},
                        {"train_size", r.train_size},
                        {"test_size", r.test_size}});
    }
    body["pairs"] = std::move(rows);
    return body;
}

json make_report(json body) { return {{"body", std::move(body)}, {"generated_at", utc_now()}}; }

std::string dump_body(const json& report) { return report.at("body").dump(2); }

void write_report(const json& report, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write report " + path.string());
    out << report.dump(2) << '\n';
}

json read_report(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile("report not found: " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("body") || !j["body"].is_object() ||
        !j["body"].contains("protocol"))
        throw CorruptReport(path.string() + " is not a report file");
    return j;
}

std::string render_report(const json& report) {
    const json& b = report.at("body");
    std::ostringstream out;
    const auto protocol = b.at("protocol").get<std::string>();
    out << "protocol:    " << protocol << '\n';
    out << "model:       " << b.at("config").value("model", json("?")).dump() << '\n';
    out << "seed:        " << b.at("seed").get<std::uint64_t>() << '\n';
    out << "fingerprint: " << b.at("fingerprint").get<std::string>() << '\n';
    if (report.contains("generated_at")) out << "generated:   " << report["generated_at"].get<std::string>() << '\n';
    out << '\n';

    if (protocol == "cv") {
        out << "task " << b.at("task").get<std::string>() << ", " << b.at("k").get<int>() << " folds\n";
        for (const auto& f : b.at("folds")) {
            out << "fold " << f.at("fold").get<int>() << '\n';
            render_metrics(out, f);
        }
        out << "mean over folds\n";
        render_metrics(out, b.at("mean"));
        out << "confusion (rows = true class, summed over folds)\n";
        const auto& classes = b.at("classes");
        const auto& cm = b.at("mean").at("confusion");
        for (std::size_t i = 0; i < cm.size(); ++i) {
            out << "    " << classes.at(i).get<std::string>() << ':';
            for (const auto& v : cm[i]) out << ' ' << v.get<std::uint64_t>();
            out << '\n';
        }
    } else if (protocol == "zero-day") {
        for (const auto& r : b.at("families"))
            out << "  " << r.at("family").get<std::string>() << ": " << pct(r.at("accuracy").get<double>()) << " ("
                << r.at("test_size").get<std::size_t>() << " test sessions)\n";
        out << "  average: " << pct(b.at("mean_accuracy").get<double>()) << '\n';
    } else if (protocol == "incremental") {
        for (const auto& s : b.at("steps")) {
            out << "  step " << s.at("step").get<std::size_t>() << " (+"
                << s.at("families").back().get<std::string>() << "):";
            if (!s.at("binary_accuracy").is_null()) out << " binary " << pct(s["binary_accuracy"].get<double>());
            if (!s.at("family_accuracy").is_null()) out << " family " << pct(s["family_accuracy"].get<double>());
            out << '\n';
        }
    } else if (protocol == "cross") {
        for (const auto& r : b.at("pairs"))
            out << "  train " << r.at("train_family").get<std::string>() << " -> test "
                << r.at("test_family").get<std::string>() << ": " << pct(r.at("accuracy").get<double>()) << '\n';
    }
    return out.str();
}

void write_predictions_csv(std::span<const SamplePrediction> predictions, std::span<const std::string> classes,
                           const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write predictions " + path.string());
    out << "session_id,fold,truth,predicted";
    for (const auto& c : classes) out << ",p_" << c;
    out << '\n';
    char buf[32];
    for (const auto& p : predictions) {
        out << p.session_id << ',' << p.fold << ',' << classes[p.truth] << ',' << classes[p.predicted];
        for (double v : p.probs) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

} // namespace mtc::eval
