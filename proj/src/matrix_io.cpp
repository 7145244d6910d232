#include "vabft/matrix_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace vabft {

static_assert(std::endian::native == std::endian::little,
              "matrix file I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'V', 'A', 'B', 'F', 'T', 'M', 'A', 'T'};

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is, const std::string& path) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("truncated matrix file: " + path);
    return v;
}

// Finite values are quantized onto the grid; non-finite values pass through
// raw so corrupted products can be round-tripped for verification.
void fill_values(Matrix& m, const std::vector<double>& vals) {
    for (int64_t i = 0; i < m.rows(); ++i) {
        for (int64_t j = 0; j < m.cols(); ++j) {
            const double v = vals[size_t(i * m.cols() + j)];
            if (std::isfinite(v))
                m.set(i, j, v);
            else
                m.set_raw(i, j, v);
        }
    }
}

} // namespace

void save_matrix_binary(const Matrix& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.write(kMagic, sizeof(kMagic));
    write_pod(os, kMatrixFileVersion);
    write_pod(os, uint8_t(m.format().format));
    write_pod(os, uint64_t(m.rows()));
    write_pod(os, uint64_t(m.cols()));
    os.write(reinterpret_cast<const char*>(m.values().data()),
             std::streamsize(m.values().size() * sizeof(double)));
    if (!os) throw std::runtime_error("write failed: " + path);
}

Matrix load_matrix_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a VABFTMAT file: " + path);
    const auto version = read_pod<uint32_t>(is, path);
    if (version != kMatrixFileVersion)
        throw std::runtime_error("unsupported matrix file version in " + path);
    const auto fmt_id = read_pod<uint8_t>(is, path);
    if (fmt_id > 3) throw std::runtime_error("bad format id in " + path);
    const auto rows = int64_t(read_pod<uint64_t>(is, path));
    const auto cols = int64_t(read_pod<uint64_t>(is, path));
    if (rows < 1 || cols < 1 || rows > (int64_t(1) << 32) || cols > (int64_t(1) << 32))
        throw std::runtime_error("implausible dimensions in " + path);

    std::vector<double> vals(size_t(rows * cols));
    is.read(reinterpret_cast<char*>(vals.data()), std::streamsize(vals.size() * sizeof(double)));
    if (!is) throw std::runtime_error("truncated matrix file: " + path);

    Matrix m(rows, cols, PrecisionSpec::of(Format(fmt_id)));
    fill_values(m, vals);
    return m;
}

void save_matrix_csv(const Matrix& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.precision(17);
    for (int64_t i = 0; i < m.rows(); ++i) {
        for (int64_t j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << m(i, j);
        }
        os << '\n';
    }
}

Matrix load_matrix_csv(const std::string& path, const PrecisionSpec& fmt) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::vector<double> vals;
    int64_t rows = 0, cols = -1;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        int64_t c = 0;
        while (std::getline(ss, tok, ',')) {
            vals.push_back(std::stod(tok));
            ++c;
        }
        if (cols == -1)
            cols = c;
        else if (c != cols)
            throw std::runtime_error("ragged CSV row in " + path);
        ++rows;
    }
    if (rows == 0) throw std::runtime_error("empty CSV: " + path);

    Matrix m(rows, cols, fmt);
    fill_values(m, vals);
    return m;
}

Matrix load_matrix_auto(const std::string& path, const std::optional<PrecisionSpec>& csv_format) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot open: " + path);
    char magic[8] = {};
    probe.read(magic, sizeof(magic));
    probe.close();
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) == 0) return load_matrix_binary(path);
    return load_matrix_csv(path, csv_format.value_or(PrecisionSpec::fp64()));
}

} // namespace vabft
