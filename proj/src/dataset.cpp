#include "ptyroi/dataset.hpp"

#include "ptyroi/errors.hpp"
#include "ptyroi/parallel.hpp"
#include "ptyroi/text.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace ptyroi {

namespace {

constexpr char kMagic[4] = {'P', 'T', 'Y', 'S'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kDtypeF32 = 0;
constexpr std::size_t kHeaderBytes = 24;
constexpr std::string_view kPositionsHeader = "index,row,col,x_um,y_um";

void put_u32(unsigned char* p, std::uint32_t v) {
    p[0] = static_cast<unsigned char>(v & 0xFF);
    p[1] = static_cast<unsigned char>((v >> 8) & 0xFF);
    p[2] = static_cast<unsigned char>((v >> 16) & 0xFF);
    p[3] = static_cast<unsigned char>((v >> 24) & 0xFF);
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void check_unique_cells(const std::vector<ScanPosition>& positions) {
    std::vector<std::uint64_t> cells;
    cells.reserve(positions.size());
    for (const auto& p : positions)
        cells.push_back((static_cast<std::uint64_t>(p.row) << 32) | p.col);
    std::sort(cells.begin(), cells.end());
    if (std::adjacent_find(cells.begin(), cells.end()) != cells.end())
        throw GeometryError("duplicate scan cell (row,col) in positions");
}

std::vector<ScanPosition> parse_positions_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open positions file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();

    std::vector<ScanPosition> positions;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string::npos) end = content.size();
        const std::string_view line = text::trim(
            std::string_view(content).substr(start, end - start));
        start = end + 1;
        if (line.empty()) continue;
        ++line_no;
        if (line_no == 1) {
            if (line != kPositionsHeader)
                throw FormatError("positions file: bad header '" + std::string(line) + "'");
            continue;
        }
        const auto fields = text::split(line, ',');
        if (fields.size() != 5)
            throw FormatError("positions file line " + std::to_string(line_no) +
                              ": expected 5 fields");
        ScanPosition p;
        p.index = static_cast<std::uint32_t>(text::parse_uint(fields[0]));
        p.row = static_cast<std::uint32_t>(text::parse_uint(fields[1]));
        p.col = static_cast<std::uint32_t>(text::parse_uint(fields[2]));
        p.x_um = text::parse_double(fields[3]);
        p.y_um = text::parse_double(fields[4]);
        if (p.index != positions.size() + 1)
            throw FormatError("positions file: index must ascend from 1 without gaps");
        if (p.row < 1 || p.col < 1)
            throw DataError("positions file: row/col must be >= 1");
        positions.push_back(p);
    }
    return positions;
}

}  // namespace

void ScanDataset::validate() const {
    if (positions.empty()) throw SizeError("dataset has no frames");
    if (frame_rows < 1 || frame_cols < 1) throw SizeError("frame dimensions must be >= 1");
    if (frames.size() != num_frames() * frame_size())
        throw DataError("frame buffer size does not match K*N*M");
    for (const auto& p : positions) {
        if (p.row < 1 || p.row > grid_rows || p.col < 1 || p.col > grid_cols)
            throw GeometryError("scan position outside grid");
    }
    check_unique_cells(positions);
    for (const float v : frames) {
        if (!(v >= 0.0f) || !std::isfinite(v))
            throw DataError("pattern intensities must be nonnegative and finite");
    }
}

ScanDataset load_dataset(const std::filesystem::path& stack_path,
                         const std::filesystem::path& positions_path, int threads) {
    std::ifstream in(stack_path, std::ios::binary);
    if (!in) throw IoError("cannot open stack file: " + stack_path.string());

    unsigned char header[kHeaderBytes];
    if (!in.read(reinterpret_cast<char*>(header), kHeaderBytes))
        throw FormatError("stack file shorter than header");
    if (std::memcmp(header, kMagic, 4) != 0)
        throw FormatError("stack file: bad magic");
    const std::uint32_t version = get_u32(header + 4);
    if (version != kVersion)
        throw FormatError("stack file: unsupported version " + std::to_string(version));
    const std::uint32_t k = get_u32(header + 8);
    const std::uint32_t n = get_u32(header + 12);
    const std::uint32_t m = get_u32(header + 16);
    const std::uint32_t dtype = get_u32(header + 20);
    if (dtype != kDtypeF32)
        throw FormatError("stack file: unsupported dtype " + std::to_string(dtype));
    if (k < 1 || n < 1 || m < 1) throw DataError("stack file: K, N, M must be >= 1");

    const std::uint64_t count = static_cast<std::uint64_t>(k) * n * m;
    const std::uint64_t expected = kHeaderBytes + count * 4;
    const std::uint64_t actual = std::filesystem::file_size(stack_path);
    if (actual != expected)
        throw DataError("stack file truncated or padded: " + std::to_string(actual) +
                        " bytes, header implies " + std::to_string(expected));

    ScanDataset ds;
    ds.frame_rows = n;
    ds.frame_cols = m;
    ds.frames.resize(count);
    static_assert(std::endian::native == std::endian::little && sizeof(float) == 4);
    if (!in.read(reinterpret_cast<char*>(ds.frames.data()),
                 static_cast<std::streamsize>(count * 4)))
        throw IoError("stack file: read failed");

    parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const float v = ds.frames[i];
            if (!(v >= 0.0f) || !std::isfinite(v))
                throw DataError("stack file: negative or non-finite intensity");
        }
    });

    ds.positions = parse_positions_csv(positions_path);
    if (ds.positions.size() != k)
        throw DataError("positions row count " + std::to_string(ds.positions.size()) +
                        " does not match stack K=" + std::to_string(k));
    check_unique_cells(ds.positions);
    for (const auto& p : ds.positions) {
        ds.grid_rows = std::max<std::size_t>(ds.grid_rows, p.row);
        ds.grid_cols = std::max<std::size_t>(ds.grid_cols, p.col);
    }
    const auto& first = ds.positions.front();
    ds.step_um = first.row > 0 ? first.x_um / first.row : 0.0;
    return ds;
}

void save_dataset(const ScanDataset& ds, const std::filesystem::path& stack_path,
                  const std::filesystem::path& positions_path) {
    ds.validate();

    std::ofstream out(stack_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write stack file: " + stack_path.string());
    unsigned char header[kHeaderBytes];
    std::memcpy(header, kMagic, 4);
    put_u32(header + 4, kVersion);
    put_u32(header + 8, static_cast<std::uint32_t>(ds.num_frames()));
    put_u32(header + 12, static_cast<std::uint32_t>(ds.frame_rows));
    put_u32(header + 16, static_cast<std::uint32_t>(ds.frame_cols));
    put_u32(header + 20, kDtypeF32);
    out.write(reinterpret_cast<const char*>(header), kHeaderBytes);
    static_assert(std::endian::native == std::endian::little && sizeof(float) == 4);
    out.write(reinterpret_cast<const char*>(ds.frames.data()),
              static_cast<std::streamsize>(ds.frames.size() * 4));
    if (!out) throw IoError("stack file: write failed");
    out.close();

    std::ofstream csv(positions_path, std::ios::trunc);
    if (!csv) throw IoError("cannot write positions file: " + positions_path.string());
    csv << kPositionsHeader << '\n';
    for (const auto& p : ds.positions) {
        csv << p.index << ',' << p.row << ',' << p.col << ','
            << text::format_double(p.x_um) << ',' << text::format_double(p.y_um) << '\n';
    }
    if (!csv) throw IoError("positions file: write failed");
}

std::vector<std::uint32_t> retained_indices(const ScanDataset& ds, const RoiMask& mask) {
    if (mask.cells.rows() != ds.grid_rows || mask.cells.cols() != ds.grid_cols)
        throw GeometryError("mask grid does not match dataset grid");
    std::vector<std::uint32_t> kept;
    for (const auto& p : ds.positions)
        if (mask.cells.at(p.row - 1, p.col - 1)) kept.push_back(p.index);
    return kept;
}

ScanDataset filter_dataset(const ScanDataset& ds, const RoiMask& mask) {
    if (mask.cells.rows() != ds.grid_rows || mask.cells.cols() != ds.grid_cols)
        throw GeometryError("mask grid does not match dataset grid");

    ScanDataset out;
    out.frame_rows = ds.frame_rows;
    out.frame_cols = ds.frame_cols;
    out.grid_rows = ds.grid_rows;
    out.grid_cols = ds.grid_cols;
    out.step_um = ds.step_um;

    for (std::size_t k = 0; k < ds.num_frames(); ++k) {
        const auto& p = ds.positions[k];
        if (!mask.cells.at(p.row - 1, p.col - 1)) continue;
        ScanPosition q = p;
        q.index = static_cast<std::uint32_t>(out.positions.size() + 1);
        out.positions.push_back(q);
        const auto src = ds.frame_values(k);
        out.frames.insert(out.frames.end(), src.begin(), src.end());
    }
    if (out.positions.empty())
        throw NumericalError("RoI mask selects no frames");
    return out;
}

void save_grid_f32(const Grid<double>& g, const std::filesystem::path& path) {
    if (g.empty()) throw SizeError("cannot save an empty grid");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write grid file: " + path.string());
    unsigned char header[kHeaderBytes];
    std::memcpy(header, kMagic, 4);
    put_u32(header + 4, kVersion);
    put_u32(header + 8, 1);
    put_u32(header + 12, static_cast<std::uint32_t>(g.rows()));
    put_u32(header + 16, static_cast<std::uint32_t>(g.cols()));
    put_u32(header + 20, kDtypeF32);
    out.write(reinterpret_cast<const char*>(header), kHeaderBytes);
    std::vector<float> values(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        values[i] = static_cast<float>(g.flat()[i]);
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * 4));
    if (!out) throw IoError("grid file: write failed");
}

Grid<double> load_grid_f32(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open grid file: " + path.string());
    unsigned char header[kHeaderBytes];
    if (!in.read(reinterpret_cast<char*>(header), kHeaderBytes))
        throw FormatError("grid file shorter than header");
    if (std::memcmp(header, kMagic, 4) != 0) throw FormatError("grid file: bad magic");
    if (get_u32(header + 4) != kVersion) throw FormatError("grid file: unsupported version");
    if (get_u32(header + 8) != 1) throw FormatError("grid file: expected K=1");
    const std::uint32_t n = get_u32(header + 12);
    const std::uint32_t m = get_u32(header + 16);
    if (get_u32(header + 20) != kDtypeF32)
        throw FormatError("grid file: unsupported dtype");
    const std::uint64_t expected = kHeaderBytes + static_cast<std::uint64_t>(n) * m * 4;
    if (std::filesystem::file_size(path) != expected)
        throw DataError("grid file truncated or padded");
    std::vector<float> values(static_cast<std::size_t>(n) * m);
    if (!in.read(reinterpret_cast<char*>(values.data()),
                 static_cast<std::streamsize>(values.size() * 4)))
        throw IoError("grid file: read failed");
    Grid<double> g(n, m);
    for (std::size_t i = 0; i < g.size(); ++i) g.flat()[i] = values[i];
    return g;
}

void save_retained_indices(const std::vector<std::uint32_t>& indices,
                           const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write index file: " + path.string());
    out << "index\n";
    for (const auto idx : indices) out << idx << '\n';
    if (!out) throw IoError("index file: write failed");
}

}  // namespace ptyroi
