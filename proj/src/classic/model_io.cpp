#include "mtc/classic/model_io.hpp"

#include <cstring>

#include "mtc/common/byte_io.hpp"
#include "mtc/common/error.hpp"

namespace mtc::classic {

namespace {

constexpr char kMagic[4] = {'M', 'T', 'C', 'M'};
constexpr std::uint16_t kVersion = 1;
using Reader = ByteReader<CorruptModelFile>;

void encode_tree(ByteWriter& w, const DecisionTree& t) {
    w.put(static_cast<std::uint64_t>(t.n_features()));
    w.put(t.n_classes());
    w.put(static_cast<std::uint32_t>(t.nodes().size()));
    for (const auto& n : t.nodes()) {
        w.put(static_cast<std::uint8_t>(n.is_leaf()));
        if (n.is_leaf()) {
            for (double p : n.probs) w.put(p);
        } else {
            w.put(n.feature);
            w.put(n.threshold);
            w.put(n.left);
            w.put(n.right);
        }
    }
}

DecisionTree decode_tree(Reader& r) {
    const auto d = r.get<std::uint64_t>();
    const auto classes = r.get<std::uint32_t>();
    const auto count = r.get<std::uint32_t>();
    if (count == 0 || count > r.remaining()) throw CorruptModelFile("bad node count");
    std::vector<TreeNode> nodes(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        auto& n = nodes[i];
        if (r.get<std::uint8_t>()) {
            n.probs.resize(classes);
            for (auto& p : n.probs) p = r.get<double>();
        } else {
            n.feature = r.get<std::int32_t>();
            n.threshold = r.get<double>();
            n.left = r.get<std::int32_t>();
            n.right = r.get<std::int32_t>();
            const auto in_range = [&](std::int32_t c) { return c > static_cast<std::int32_t>(i) && c < static_cast<std::int32_t>(count); };
            if (n.feature < 0 || static_cast<std::uint64_t>(n.feature) >= d || !in_range(n.left) || !in_range(n.right))
                throw CorruptModelFile("bad split node");
        }
    }
    return DecisionTree(std::move(nodes), static_cast<std::size_t>(d), classes);
}

} // namespace

std::vector<std::uint8_t> encode_model(const ClassicModel& model) {
    ByteWriter w;
    w.put_bytes({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
    w.put(kVersion);
    w.put(static_cast<std::uint8_t>(model.index()));
    if (const auto* t = std::get_if<DecisionTree>(&model)) {
        encode_tree(w, *t);
    } else if (const auto* f = std::get_if<ForestModel>(&model)) {
        w.put(static_cast<std::uint8_t>(f->mode()));
        w.put(f->seed());
        w.put(static_cast<std::uint64_t>(f->feature_subsample()));
        w.put(static_cast<std::uint32_t>(f->n_trees()));
        for (const auto& t : f->trees()) encode_tree(w, t);
    } else {
        const auto& k = std::get<KnnModel>(model);
        w.put(k.k());
        w.put(k.n_classes());
        w.put(static_cast<std::uint8_t>(k.train_x().dims().size()));
        for (auto dim : k.train_x().dims()) w.put(dim);
        w.put(static_cast<std::uint64_t>(k.train_x().count()));
        for (float v : k.train_x().values()) w.put(v);
        for (auto y : k.train_y()) w.put(y);
    }
    return std::move(w.buffer());
}

ClassicModel decode_model(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 7 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw CorruptModelFile("not a model file (bad magic)");
    Reader r(bytes.subspan(4));
    if (r.get<std::uint16_t>() != kVersion) throw CorruptModelFile("unsupported model version");
    const auto kind = r.get<std::uint8_t>();
    ClassicModel out;
    if (kind == 0) {
        out = decode_tree(r);
    } else if (kind == 1) {
        const auto mode = r.get<std::uint8_t>();
        if (mode > 1) throw CorruptModelFile("bad forest mode");
        const auto seed = r.get<std::uint64_t>();
        const auto fs = r.get<std::uint64_t>();
        const auto n = r.get<std::uint32_t>();
        if (n == 0 || n > r.remaining()) throw CorruptModelFile("bad tree count");
        std::vector<DecisionTree> trees;
        trees.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) trees.push_back(decode_tree(r));
        out = ForestModel(std::move(trees), static_cast<ForestMode>(mode), static_cast<std::size_t>(fs), seed);
    } else if (kind == 2) {
        const auto k = r.get<std::uint32_t>();
        const auto classes = r.get<std::uint32_t>();
        const auto rank = r.get<std::uint8_t>();
        if (rank < 1 || rank > 3) throw CorruptModelFile("bad rank");
        std::vector<std::uint32_t> dims(rank);
        std::uint64_t row = 1;
        for (auto& dim : dims) {
            dim = r.get<std::uint32_t>();
            row *= dim;
        }
        const auto n = r.get<std::uint64_t>();
        if (row == 0 || n > r.remaining() / 4 / row) throw CorruptModelFile("bad knn size");
        std::vector<float> x(static_cast<std::size_t>(n * row));
        for (auto& v : x) v = r.get<float>();
        std::vector<std::uint32_t> y(static_cast<std::size_t>(n));
        for (auto& v : y) v = r.get<std::uint32_t>();
        try {
            out = KnnModel(features::TensorBatch(std::move(dims), std::move(x)), std::move(y), k, classes);
        } catch (const std::exception& ex) {
            throw CorruptModelFile(std::string("invalid knn model: ") + ex.what());
        }
    } else {
        throw CorruptModelFile("unknown model kind");
    }
    if (r.remaining() != 0) throw CorruptModelFile("trailing bytes in model file");
    return out;
}

void save_model(const ClassicModel& model, const std::filesystem::path& path) {
    write_file_bytes(path.string(), encode_model(model));
}

ClassicModel load_model(const std::filesystem::path& path) { return decode_model(read_file_bytes(path.string())); }

} // namespace mtc::classic
