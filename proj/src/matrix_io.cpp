#include "sbl/matrix_io.hpp"

#include <array>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace sbl {

namespace {

constexpr char kMagic[8] = {'S', 'B', 'L', 'M', 'A', 'T', '0', '1'};

void pack_u64_le(std::uint64_t value, char* out) {
    for (int i = 0; i < 8; ++i) out[i] = static_cast<char>((value >> (8 * i)) & 0xff);
}

std::uint64_t unpack_u64_le(const char* in) {
    std::uint64_t value = 0;
    for (int i = 0; i < 8; ++i)
        value |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[i]))
                 << (8 * i);
    return value;
}

void pack_f64_le(double value, char* out) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, 8);
    pack_u64_le(bits, out);
}

double unpack_f64_le(const char* in) {
    const std::uint64_t bits = unpack_u64_le(in);
    double value;
    std::memcpy(&value, &bits, 8);
    return value;
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
    throw std::runtime_error("matrix_io: " + what + " (" + path.string() + ")");
}

void write_text(std::ostream& out, const Matrix& m) {
    out << m.rows() << " " << m.cols() << "\n";
    char buf[40];
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << buf << (j + 1 == m.cols() ? "" : " ");
        }
        out << "\n";
    }
}

void write_binary(std::ostream& out, const Matrix& m) {
    out.write(kMagic, 8);
    char dims[16];
    pack_u64_le(static_cast<std::uint64_t>(m.rows()), dims);
    pack_u64_le(static_cast<std::uint64_t>(m.cols()), dims + 8);
    out.write(dims, 16);
    std::vector<char> row(static_cast<size_t>(m.cols()) * 8);
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j)
            pack_f64_le(m(i, j), row.data() + static_cast<size_t>(j) * 8);
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
}

Matrix read_text(const std::filesystem::path& path, std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) fail(path, "malformed header: empty file");
    std::istringstream hs(header);
    long long rows = -1, cols = -1;
    if (!(hs >> rows >> cols) || rows < 0 || cols < 0)
        fail(path, "malformed header: expected \"rows cols\", got \"" + header + "\"");
    std::string extra;
    if (hs >> extra)
        fail(path, "malformed header: trailing token \"" + extra + "\"");

    Matrix m(rows, cols);
    const long long total = rows * cols;
    std::string token;
    for (long long k = 0; k < total; ++k) {
        if (!(in >> token))
            fail(path, "size mismatch: expected " + std::to_string(total) +
                           " values, found " + std::to_string(k));
        char* end = nullptr;
        const double value = std::strtod(token.c_str(), &end);  // accepts nan/inf
        if (end != token.c_str() + token.size())
            fail(path, "malformed value \"" + token + "\" at index " +
                           std::to_string(k));
        if (!std::isfinite(value))
            fail(path, "non-finite value at index " + std::to_string(k));
        m(k / cols, k % cols) = value;
    }
    if (in >> token)
        fail(path, "size mismatch: more than " + std::to_string(total) + " values");
    return m;
}

Matrix read_binary(const std::filesystem::path& path, std::istream& in) {
    char dims[16];
    if (!in.read(dims, 16)) fail(path, "malformed header: truncated dimensions");
    const std::uint64_t rows = unpack_u64_le(dims);
    const std::uint64_t cols = unpack_u64_le(dims + 8);
    if (rows > (1ull << 40) || cols > (1ull << 40))
        fail(path, "malformed header: implausible dimensions");

    const std::uint64_t total = rows * cols;
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    std::vector<char> row(static_cast<size_t>(cols) * 8);
    for (std::uint64_t i = 0; i < rows; ++i) {
        if (!in.read(row.data(), static_cast<std::streamsize>(row.size())))
            fail(path, "size mismatch: payload shorter than " +
                           std::to_string(total) + " values");
        for (std::uint64_t j = 0; j < cols; ++j) {
            const double value = unpack_f64_le(row.data() + static_cast<size_t>(j) * 8);
            if (!std::isfinite(value))
                fail(path, "non-finite value at row " + std::to_string(i));
            m(static_cast<Index>(i), static_cast<Index>(j)) = value;
        }
    }
    char spare;
    if (in.read(&spare, 1))
        fail(path, "size mismatch: payload longer than " + std::to_string(total) +
                       " values");
    return m;
}

}  // namespace

void save_matrix(const std::filesystem::path& path, const Matrix& m,
                 MatrixFormat format) {
    if (!m.allFinite()) fail(path, "non-finite value in matrix being saved");
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(tmp, "cannot open for writing");
        if (format == MatrixFormat::text)
            write_text(out, m);
        else
            write_binary(out, m);
        if (!out) fail(tmp, "write failed");
    }
    std::filesystem::rename(tmp, path);
}

Matrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open for reading");
    char magic[8];
    if (in.read(magic, 8) && std::memcmp(magic, kMagic, 8) == 0)
        return read_binary(path, in);
    in.clear();
    in.seekg(0);
    return read_text(path, in);
}

}  // namespace sbl
