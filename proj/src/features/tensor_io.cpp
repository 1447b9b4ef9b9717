#include "mtc/features/tensor_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>

#include "mtc/common/byte_io.hpp"
#include "mtc/common/error.hpp"

namespace mtc::features {

namespace {

constexpr char kMagic[4] = {'F', 'T', 'N', 'S'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kFloat32 = 1;

} // namespace

std::vector<std::uint8_t> encode_tensor_file(const TensorBatch& batch) {
    ByteWriter w;
    w.put_bytes({reinterpret_cast<const std::uint8_t*>(kMagic), 4});
    w.put(kVersion);
    w.put(kFloat32);
    w.put(static_cast<std::uint8_t>(batch.dims().size()));
    for (auto d : batch.dims()) w.put(d);
    w.put(static_cast<std::uint64_t>(batch.count()));
    w.buffer().reserve(w.buffer().size() + batch.values().size() * 4);
    for (float v : batch.values()) w.put(v);
    return std::move(w.buffer());
}

TensorBatch decode_tensor_file(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw CorruptTensorFile("not a tensor file (bad magic)");
    ByteReader<CorruptTensorFile> r(bytes.subspan(4));
    if (r.get<std::uint16_t>() != kVersion) throw CorruptTensorFile("unsupported tensor file version");
    if (r.get<std::uint8_t>() != kFloat32) throw CorruptTensorFile("unsupported dtype");
    const auto rank = r.get<std::uint8_t>();
    if (rank < 1 || rank > 3) throw CorruptTensorFile("tensor rank must be 1..3");
    std::vector<std::uint32_t> dims(rank);
    std::uint64_t row = 1;
    for (auto& d : dims) {
        d = r.get<std::uint32_t>();
        if (d == 0) throw CorruptTensorFile("zero dimension");
        row *= d;
    }
    const auto count = r.get<std::uint64_t>();
    if (row == 0 || count > r.remaining() / 4 / row || r.remaining() != count * row * 4)
        throw CorruptTensorFile("value section size does not match header");
    std::vector<float> values(static_cast<std::size_t>(count * row));
    for (auto& v : values) v = r.get<float>();
    return TensorBatch(std::move(dims), std::move(values));
}

void write_tensor_file(const TensorBatch& batch, const std::filesystem::path& path) {
    write_file_bytes(path.string(), encode_tensor_file(batch));
}

TensorBatch read_tensor_file(const std::filesystem::path& path) {
    return decode_tensor_file(read_file_bytes(path.string()));
}

TensorBatch stack_tensors(std::span<const FeatureTensor> tensors, const std::vector<std::uint32_t>& dims_if_empty) {
    if (tensors.empty()) {
        if (dims_if_empty.empty()) throw ShapeMismatch("cannot infer dims of an empty tensor set");
        return TensorBatch(dims_if_empty);
    }
    TensorBatch out(tensors.front().dims);
    for (const auto& t : tensors) {
        if (!(t.repr == tensors.front().repr)) throw ShapeMismatch("tensors carry different representations");
        out.append(t);
    }
    return out;
}

void write_label_file(std::span<const LabelRow> rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write label file " + path.string());
    for (const auto& r : rows) out << r.session_id << ',' << r.label << ',' << r.family << '\n';
}

std::vector<LabelRow> read_label_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile("cannot open label file " + path.string());
    std::vector<LabelRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string::npos) throw CorruptTensorFile("malformed label line: " + line);
        LabelRow r;
        r.session_id = line.substr(0, c1);
        const char* b = line.data() + c1 + 1;
        const char* e = line.data() + c2;
        if (auto [p, ec] = std::from_chars(b, e, r.label); ec != std::errc{} || p != e)
            throw CorruptTensorFile("non-integer label: " + line);
        r.family = line.substr(c2 + 1);
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace mtc::features
