#include "delaybif_cli/artifacts.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <system_error>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

namespace delaybif::cli {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string fixed2(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

std::string csv_cell(const Table::Cell& c) {
    if (const double* d = std::get_if<double>(&c)) return format_double(*d);
    if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

// Ticks at integer multiples of 1, 2 or 5 times a power of ten. Each value is
// parsed from its decimal spelling so labels print without binary noise.
std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    const int e = static_cast<int>(std::floor(std::log10(span / target)));
    const double base = std::pow(10.0, e);
    int mant = 1;
    for (int m : {1, 2, 5, 10})
        if (span / (m * base) <= target) {
            mant = m;
            break;
        }
    const double step = mant * base;
    std::vector<double> ticks;
    for (long long k = static_cast<long long>(std::ceil(lo / step - 1e-9));
         static_cast<double>(k) * step <= hi + 1e-9 * step; ++k) {
        const std::string text = std::to_string(k * mant) + "e" + std::to_string(e);
        double v = 0.0;
        std::from_chars(text.data(), text.data() + text.size(), v);
        ticks.push_back(v);
        if (ticks.size() > 50) break;
    }
    return ticks;
}

}  // namespace

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw std::invalid_argument("table needs at least one column");
}

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw std::invalid_argument("row width does not match the header");
    rows_.push_back(std::move(row));
}

std::size_t Table::index_of(const std::string& column) const {
    const auto it = std::find(columns_.begin(), columns_.end(), column);
    if (it == columns_.end()) throw std::out_of_range("no column '" + column + "'");
    return static_cast<std::size_t>(it - columns_.begin());
}

std::vector<double> Table::numeric(const std::string& column) const {
    const std::size_t j = index_of(column);
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) {
        if (const double* d = std::get_if<double>(&r[j])) out.push_back(*d);
        else if (const long long* i = std::get_if<long long>(&r[j])) out.push_back(static_cast<double>(*i));
        else out.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

std::string Table::to_csv() const {
    std::string out;
    for (std::size_t j = 0; j < columns_.size(); ++j) out += (j ? "," : "") + columns_[j];
    out += '\n';
    for (const auto& r : rows_) {
        for (std::size_t j = 0; j < r.size(); ++j) out += (j ? "," : "") + csv_cell(r[j]);
        out += '\n';
    }
    return out;
}

std::string emit_plot(const Table& table, const PlotStyle& style) {
    const int W = style.width, H = style.height;
    const double left = 80, right = 24, top = 40, bottom = 56;
    std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(W) + "\" height=\"" +
           std::to_string(H) + "\" viewBox=\"0 0 " + std::to_string(W) + " " + std::to_string(H) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!style.title.empty())
        svg += "<text x=\"" + std::to_string(W / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"15\">" + xml_escape(style.title) + "</text>\n";

    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
    if (!table.empty())
        for (const Series& s : style.series) {
            const auto xs = table.numeric(s.x), ys = table.numeric(s.y);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) continue;
                xlo = std::min(xlo, xs[i]);
                xhi = std::max(xhi, xs[i]);
                ylo = std::min(ylo, ys[i]);
                yhi = std::max(yhi, ys[i]);
            }
        }
    if (!(xlo <= xhi)) {
        svg += "<text x=\"" + std::to_string(W / 2) + "\" y=\"" + std::to_string(H / 2) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#b00\">"
               "warning: no data to plot</text>\n</svg>\n";
        return svg;
    }
    if (style.mark_zero) {
        ylo = std::min(ylo, 0.0);
        yhi = std::max(yhi, 0.0);
    }
    auto widen = [](double& lo, double& hi) {
        if (hi - lo <= 1e-12 * std::max(1.0, std::abs(lo))) {
            const double pad = std::max(1.0, std::abs(lo)) * 0.5;
            lo -= pad;
            hi += pad;
        } else {
            const double pad = 0.04 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
    };
    widen(xlo, xhi);
    widen(ylo, yhi);
    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double x) { return left + (x - xlo) / (xhi - xlo) * pw; };
    auto py = [&](double y) { return top + (yhi - y) / (yhi - ylo) * ph; };

    svg += "<g font-family=\"sans-serif\" font-size=\"11\" stroke=\"none\" fill=\"black\">\n";
    for (double t : nice_ticks(xlo, xhi)) {
        const std::string X = fixed2(px(t));
        svg += "<line x1=\"" + X + "\" y1=\"" + fixed2(top + ph) + "\" x2=\"" + X + "\" y2=\"" + fixed2(top + ph + 5) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + X + "\" y=\"" + fixed2(top + ph + 18) + "\" text-anchor=\"middle\">" +
               format_double(t) + "</text>\n";
    }
    for (double t : nice_ticks(ylo, yhi)) {
        const std::string Y = fixed2(py(t));
        svg += "<line x1=\"" + fixed2(left - 5) + "\" y1=\"" + Y + "\" x2=\"" + fixed2(left) + "\" y2=\"" + Y +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fixed2(left - 8) + "\" y=\"" + fixed2(py(t) + 4) + "\" text-anchor=\"end\">" +
               format_double(t) + "</text>\n";
    }
    svg += "</g>\n";
    svg += "<rect x=\"" + fixed2(left) + "\" y=\"" + fixed2(top) + "\" width=\"" + fixed2(pw) + "\" height=\"" +
           fixed2(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
    if (!style.x_label.empty())
        svg += "<text x=\"" + fixed2(left + pw / 2) + "\" y=\"" + std::to_string(H - 12) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + xml_escape(style.x_label) +
               "</text>\n";
    if (!style.y_label.empty())
        svg += "<text x=\"18\" y=\"" + fixed2(top + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"13\" transform=\"rotate(-90 18 " + fixed2(top + ph / 2) + ")\">" +
               xml_escape(style.y_label) + "</text>\n";
    if (style.mark_zero)
        svg += "<line x1=\"" + fixed2(left) + "\" y1=\"" + fixed2(py(0.0)) + "\" x2=\"" + fixed2(left + pw) +
               "\" y2=\"" + fixed2(py(0.0)) + "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";

    int legend_row = 0;
    for (const Series& s : style.series) {
        const auto xs = table.numeric(s.x), ys = table.numeric(s.y);
        const std::string color = xml_escape(s.color);
        if (s.scatter) {
            svg += "<g fill=\"" + color + "\">\n";
            for (std::size_t i = 0; i < xs.size(); ++i)
                if (std::isfinite(xs[i]) && std::isfinite(ys[i]))
                    svg += "<circle cx=\"" + fixed2(px(xs[i])) + "\" cy=\"" + fixed2(py(ys[i])) + "\" r=\"2\"/>\n";
            svg += "</g>\n";
        } else {
            // Consecutive rows of one group form a polyline; non-finite values break it.
            std::vector<double> groups(xs.size(), 0.0);
            if (s.group_by) groups = table.numeric(*s.group_by);
            std::string pts;
            auto flush = [&] {
                if (pts.find(' ') != std::string::npos)
                    svg += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"" + pts +
                           "\"/>\n";
                pts.clear();
            };
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (i > 0 && groups[i] != groups[i - 1]) flush();
                if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
                    flush();
                    continue;
                }
                if (!pts.empty()) pts += ' ';
                pts += fixed2(px(xs[i])) + "," + fixed2(py(ys[i]));
            }
            flush();
        }
        if (!s.label.empty()) {
            const double ly = top + 14 + 16 * legend_row++;
            svg += "<rect x=\"" + fixed2(left + pw - 150) + "\" y=\"" + fixed2(ly - 8) +
                   "\" width=\"12\" height=\"8\" fill=\"" + color + "\"/>\n";
            svg += "<text x=\"" + fixed2(left + pw - 132) + "\" y=\"" + fixed2(ly) +
                   "\" font-family=\"sans-serif\" font-size=\"11\">" + xml_escape(s.label) + "</text>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
        throw std::runtime_error("cannot create output directory " + dir_.string());
    const auto probe = dir_ / ".delaybif-write-probe";
    {
        std::ofstream f(probe, std::ios::binary);
        if (!f) throw std::runtime_error("output directory " + dir_.string() + " is not writable");
    }
    std::filesystem::remove(probe, ec);
}

void ArtifactWriter::write(const std::string& name, const std::string& content) {
    std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    entries_.push_back(ManifestEntry{name, sha256_hex(content), content.size()});
}

void ArtifactWriter::write_manifest(const std::string& subcommand, const std::string& status, std::uint64_t seed) {
    nlohmann::ordered_json m;
    m["schema_version"] = 1;
    m["subcommand"] = subcommand;
    m["status"] = status;
    m["seed"] = seed;
    m["files"] = nlohmann::ordered_json::array();
    for (const ManifestEntry& e : entries_)
        m["files"].push_back({{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    const std::string text = m.dump(2) + "\n";
    std::ofstream f(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write manifest");
    f << text;
}

}  // namespace delaybif::cli
