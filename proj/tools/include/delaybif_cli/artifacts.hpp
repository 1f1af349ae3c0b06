#pragma once

// Deterministic artifact emission: CSV tables, SVG plots and the manifest.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace delaybif::cli {

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Column-named table of doubles; rows may also carry string cells.
class Table {
public:
    using Cell = std::variant<double, long long, std::string>;

    explicit Table(std::vector<std::string> columns);

    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t rows() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }

    void add(std::vector<Cell> row);
    const std::vector<Cell>& row(std::size_t i) const { return rows_.at(i); }
    /// Numeric column; throws std::out_of_range for unknown names.
    std::vector<double> numeric(const std::string& column) const;
    std::size_t index_of(const std::string& column) const;

    /// Header row followed by one line per row, '\n' terminated.
    std::string to_csv() const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

struct Series {
    std::string x;
    std::string y;
    std::string label;
    bool scatter = false;
    std::string color = "#1f77b4";
    /// Rows with equal values in this column form one polyline.
    std::optional<std::string> group_by;
};

struct PlotStyle {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    bool mark_zero = false;  ///< horizontal line at y = 0
    int width = 720;
    int height = 480;
};

/// Self-contained SVG with axes, ticks and the requested series. An empty
/// table yields a placeholder carrying a warning text.
std::string emit_plot(const Table& table, const PlotStyle& style);

std::string sha256_hex(const std::string& bytes);

struct ManifestEntry {
    std::string path;  ///< relative to the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

/// Writes artifacts into one directory and records their digests.
class ArtifactWriter {
public:
    /// Creates the directory; throws std::runtime_error when it is unusable.
    explicit ArtifactWriter(std::filesystem::path dir);

    const std::filesystem::path& directory() const { return dir_; }
    void write(const std::string& name, const std::string& content);
    void write_csv(const std::string& name, const Table& table) { write(name, table.to_csv()); }
    const std::vector<ManifestEntry>& entries() const { return entries_; }

    /// manifest.json listing every written file in order of emission.
    void write_manifest(const std::string& subcommand, const std::string& status, std::uint64_t seed);

private:
    std::filesystem::path dir_;
    std::vector<ManifestEntry> entries_;
};

}  // namespace delaybif::cli
