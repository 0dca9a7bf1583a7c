#pragma once

// Binary file formats (all little-endian):
//   SEMB dataset:  "SEMB" u8 version=1 u8 dtype=0 u16 reserved u32 N u32 p u32 n_class,
//                  N*p float32 row-major, N u16 labels.
//   SCBK codebook: "SCBK" u8 version=1 u8 has_source_ids u16 reserved u32 M u32 p,
//                  M*p float32, optional M u32 source ids.

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "semcom/core.hpp"

namespace semcom {

static_assert(std::endian::native == std::endian::little, "file I/O assumes a little-endian host");

namespace detail {

class ByteWriter {
public:
    template <class T>
    void put(T value) {
        static_assert(std::is_trivially_copyable_v<T>);
        const auto* p = reinterpret_cast<const char*>(&value);
        bytes_.insert(bytes_.end(), p, p + sizeof(T));
    }
    void put_magic(const char (&magic)[5]) { bytes_.insert(bytes_.end(), magic, magic + 4); }
    void put_floats(std::span<const float> values) {
        const auto* p = reinterpret_cast<const char*>(values.data());
        bytes_.insert(bytes_.end(), p, p + values.size_bytes());
    }
    const std::vector<char>& bytes() const noexcept { return bytes_; }

private:
    std::vector<char> bytes_;
};

class ByteReader {
public:
    ByteReader(std::vector<char> bytes, std::string what) : bytes_(std::move(bytes)), what_(std::move(what)) {}

    template <class T>
    T get(const char* field) {
        T value;
        need(sizeof(T), field);
        std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }
    void expect_magic(const char (&magic)[5]) {
        need(4, "magic");
        if (std::memcmp(bytes_.data(), magic, 4) != 0) fail("bad magic", "magic");
        pos_ += 4;
    }
    std::vector<float> get_floats(std::size_t count, const char* field) {
        std::vector<float> values(count);
        need(count * sizeof(float), field);
        std::memcpy(values.data(), bytes_.data() + pos_, count * sizeof(float));
        pos_ += count * sizeof(float);
        return values;
    }
    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

    [[noreturn]] void fail(const std::string& problem, const char* field) const {
        std::ostringstream os;
        os << what_ << ": " << problem << " (field '" << field << "' at byte offset " << pos_ << ")";
        throw FormatError(os.str());
    }

private:
    void need(std::size_t n, const char* field) const {
        if (bytes_.size() - pos_ < n) fail("truncated", field);
    }

    std::vector<char> bytes_;
    std::string what_;
    std::size_t pos_ = 0;
};

inline std::vector<char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::vector<char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace detail

inline std::vector<char> encode_dataset(const LabeledDataset& ds) {
    ds.validate();
    detail::ByteWriter w;
    w.put_magic("SEMB");
    w.put<std::uint8_t>(1);
    w.put<std::uint8_t>(0);
    w.put<std::uint16_t>(0);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.size()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(ds.dim()));
    w.put<std::uint32_t>(ds.n_class);
    w.put_floats(ds.embeddings.data());
    for (auto l : ds.labels) w.put<std::uint16_t>(l);
    return w.bytes();
}

inline LabeledDataset decode_dataset(std::vector<char> bytes, const std::string& what = "SEMB") {
    detail::ByteReader r(std::move(bytes), what);
    r.expect_magic("SEMB");
    if (r.get<std::uint8_t>("version") != 1) r.fail("unsupported version", "version");
    if (r.get<std::uint8_t>("dtype") != 0) r.fail("unsupported dtype", "dtype");
    r.get<std::uint16_t>("reserved");
    const auto n = r.get<std::uint32_t>("N");
    const auto p = r.get<std::uint32_t>("p");
    const auto n_class = r.get<std::uint32_t>("n_class");
    if (n == 0) r.fail("N must be >= 1", "N");
    if (p == 0) r.fail("p must be >= 1", "p");
    if (n_class == 0) r.fail("n_class must be >= 1", "n_class");

    LabeledDataset ds;
    ds.n_class = n_class;
    ds.embeddings = Matrix(n, p, r.get_floats(std::size_t{n} * p, "embeddings"));
    ds.labels.resize(n);
    for (auto& l : ds.labels) {
        l = r.get<std::uint16_t>("labels");
        if (l >= n_class) r.fail("label " + std::to_string(l) + " >= n_class", "labels");
    }
    if (r.remaining() != 0) r.fail("trailing bytes", "end");
    if (!all_finite(ds.embeddings.data())) r.fail("non-finite embedding value", "embeddings");
    return ds;
}

inline void save_dataset(const LabeledDataset& ds, const std::string& path) {
    detail::write_file(path, encode_dataset(ds));
}

inline LabeledDataset load_dataset(const std::string& path) { return decode_dataset(detail::read_file(path), path); }

inline std::vector<char> encode_codebook(const Codebook& cb) {
    cb.validate();
    detail::ByteWriter w;
    w.put_magic("SCBK");
    w.put<std::uint8_t>(1);
    w.put<std::uint8_t>(cb.source_ids ? 1 : 0);
    w.put<std::uint16_t>(0);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(cb.size()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(cb.dim()));
    w.put_floats(cb.entries.data());
    if (cb.source_ids)
        for (auto id : *cb.source_ids) w.put<std::uint32_t>(id);
    return w.bytes();
}

inline Codebook decode_codebook(std::vector<char> bytes, const std::string& what = "SCBK") {
    detail::ByteReader r(std::move(bytes), what);
    r.expect_magic("SCBK");
    if (r.get<std::uint8_t>("version") != 1) r.fail("unsupported version", "version");
    const auto has_ids = r.get<std::uint8_t>("has_source_ids");
    if (has_ids > 1) r.fail("has_source_ids must be 0 or 1", "has_source_ids");
    r.get<std::uint16_t>("reserved");
    const auto m = r.get<std::uint32_t>("M");
    const auto p = r.get<std::uint32_t>("p");
    if (m == 0) r.fail("M must be >= 1", "M");
    if (p == 0) r.fail("p must be >= 1", "p");

    Codebook cb;
    cb.entries = Matrix(m, p, r.get_floats(std::size_t{m} * p, "entries"));
    if (has_ids) {
        std::vector<std::uint32_t> ids(m);
        for (auto& id : ids) id = r.get<std::uint32_t>("source_ids");
        cb.source_ids = std::move(ids);
    }
    if (r.remaining() != 0) r.fail("trailing bytes", "end");
    if (!all_finite(cb.entries.data())) r.fail("non-finite codebook value", "entries");
    return cb;
}

inline void save_codebook(const Codebook& cb, const std::string& path) { detail::write_file(path, encode_codebook(cb)); }

inline Codebook load_codebook(const std::string& path) { return decode_codebook(detail::read_file(path), path); }

}  // namespace semcom
