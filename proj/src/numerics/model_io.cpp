#include "strokesave/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace strokesave::nn {

namespace {

constexpr char kMagic[4] = {'S', 'S', 'M', 'D'};

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw FormatError("model file truncated");
    }
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

// Architecture rows: (kind, units, kernel, stride), stored as reals.
constexpr std::size_t kArchColumns = 4;

std::uint64_t as_count(double v, const char* what) {
    if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
        throw FormatError(std::string("invalid ") + what);
    }
    return static_cast<std::uint64_t>(v);
}

const Tensor& find(const std::vector<NamedTensor>& records, const std::string& name) {
    for (const auto& r : records) {
        if (r.name == name) return r.tensor;
    }
    throw FormatError("model file has no '" + name + "' record");
}

}  // namespace

std::vector<std::uint8_t> encode_records(std::span<const NamedTensor> records) {
    Writer w;
    w.bytes(kMagic, sizeof(kMagic));
    w.u32(kModelFormatVersion);
    w.u32(static_cast<std::uint32_t>(records.size()));
    for (const NamedTensor& r : records) {
        w.u32(static_cast<std::uint32_t>(r.name.size()));
        w.bytes(r.name.data(), r.name.size());
        w.u32(static_cast<std::uint32_t>(r.tensor.rank()));
        for (std::size_t d : r.tensor.shape()) w.u64(d);
        for (double v : r.tensor.values()) w.f64(v);
    }
    return w.take();
}

std::vector<NamedTensor> decode_records(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad model magic");
    Reader r(bytes.subspan(4));
    const std::uint32_t version = r.u32();
    if (version != kModelFormatVersion) throw FormatError("unsupported model version " + std::to_string(version));
    const std::uint32_t count = r.u32();
    std::vector<NamedTensor> records;
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor rec;
        rec.name = r.str(r.u32());
        const std::uint32_t rank = r.u32();
        if (rank == 0 || rank > 8) throw FormatError("record '" + rec.name + "' has invalid rank");
        Shape shape(rank);
        std::uint64_t total = 1;
        for (auto& d : shape) {
            d = r.u64();
            if (d == 0 || d > (1ULL << 32)) throw FormatError("record '" + rec.name + "' has invalid dimension");
            total *= d;
            if (total > (1ULL << 32)) throw FormatError("record '" + rec.name + "' is too large");
        }
        std::vector<double> values(total);
        for (double& v : values) v = r.f64();
        rec.tensor = Tensor(std::move(shape), std::move(values));
        for (const auto& prev : records) {
            if (prev.name == rec.name) throw FormatError("duplicate record '" + rec.name + "'");
        }
        records.push_back(std::move(rec));
    }
    if (!r.done()) throw FormatError("trailing bytes after last record");
    return records;
}

std::vector<std::uint8_t> serialize(const Model& model) {
    std::vector<NamedTensor> records;
    std::vector<double> arch;
    for (const LayerSpec& l : model.layers()) {
        arch.push_back(static_cast<double>(l.kind));
        arch.push_back(static_cast<double>(l.units));
        arch.push_back(static_cast<double>(l.kernel));
        arch.push_back(static_cast<double>(l.stride));
    }
    if (!arch.empty()) {
        records.push_back({"model.arch", Tensor({model.layers().size(), kArchColumns}, std::move(arch))});
    }
    std::vector<double> in(model.input_shape().begin(), model.input_shape().end());
    records.push_back({"model.input_shape", Tensor::from_values(std::move(in))});
    records.push_back({"model.seed", Tensor::from_values({static_cast<double>(model.seed() >> 32),
                                                           static_cast<double>(model.seed() & 0xffffffffULL)})});
    for (const auto& [name, t] : model.parameters()) records.push_back({name, t});
    return encode_records(records);
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
    std::vector<NamedTensor> records = decode_records(bytes);
    std::vector<LayerSpec> layers;
    for (const auto& r : records) {
        if (r.name != "model.arch") continue;
        if (r.tensor.rank() != 2 || r.tensor.shape()[1] != kArchColumns) throw FormatError("bad architecture table");
        for (std::size_t i = 0; i < r.tensor.shape()[0]; ++i) {
            const double* row = r.tensor.data() + i * kArchColumns;
            const auto kind = as_count(row[0], "layer kind");
            if (kind > static_cast<std::uint64_t>(LayerKind::softmax)) throw FormatError("unknown layer kind");
            layers.push_back({static_cast<LayerKind>(kind), as_count(row[1], "units"), as_count(row[2], "kernel"),
                              as_count(row[3], "stride")});
        }
    }
    Shape input;
    for (double d : find(records, "model.input_shape").values()) input.push_back(as_count(d, "input dimension"));
    const Tensor& seed = find(records, "model.seed");
    if (seed.size() != 2) throw FormatError("bad seed record");
    const std::uint64_t seed_value = (as_count(seed[0], "seed") << 32) | as_count(seed[1], "seed");

    ParameterMap params;
    for (auto& r : records) {
        if (r.name.rfind("model.", 0) == 0) continue;
        params.emplace(r.name, std::move(r.tensor));
    }
    try {
        return Model::assemble(std::move(input), std::move(layers), seed_value, std::move(params));
    } catch (const ShapeError& e) {
        throw FormatError(std::string("inconsistent model file: ") + e.what());
    }
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void save_model(const Model& model, const std::filesystem::path& path) {
    write_file(path, serialize(model));
}

Model load_model(const std::filesystem::path& path) {
    return deserialize_model(read_file(path));
}

}  // namespace strokesave::nn
