#include "edgeband/image.hpp"
#include "edgeband/errors.hpp"
#include "edgeband/rng.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace edgeband {

double NoiseSpec::sd() const {
    if (sigma_tilde == 0.0) return 0.0;
    if (family == NoiseFamily::gaussian) return sigma_tilde;
    if (df <= 2) throw config_error("NoiseSpec: student_t needs df > 2 for finite sd");
    return sigma_tilde * std::sqrt(static_cast<double>(df) / (df - 2));
}

ImageGrid generate(const SceneSpec& spec, int n) {
    if (n < 8) throw argument_error("generate: n must be >= 8");
    ImageGrid g;
    g.n1 = g.n2 = n;
    g.values.resize(static_cast<std::size_t>(n) * n);
    for (const auto& c : spec.curves) {
        for (int i = 1; i <= n; ++i) {
            double x = static_cast<double>(i) / n;
            if (!(c.tau(x) > 0.0)) throw argument_error("generate: tau must be positive on the grid");
            double p = c.phi(x);
            if (!(p > 0.0 && p < 1.0)) throw argument_error("generate: phi must map into (0,1)");
        }
    }
    Rng rng(spec.noise.seed);
    for (int i1 = 1; i1 <= n; ++i1) {
        double x = static_cast<double>(i1) / n;
        for (int i2 = 1; i2 <= n; ++i2) {
            double y = static_cast<double>(i2) / n;
            double v = spec.smooth ? spec.smooth(x, y) : 0.0;
            for (const auto& c : spec.curves)
                if (y <= c.phi(x)) v += c.tau(x);
            if (spec.noise.sigma_tilde > 0.0) {
                double e = spec.noise.family == NoiseFamily::gaussian
                               ? rng.normal()
                               : rng.student_t(spec.noise.df);
                v += spec.noise.sigma_tilde * e;
            }
            g.at(i1, i2) = v;
        }
    }
    return g;
}

namespace {

struct Cursor {
    const std::string& buf;
    std::size_t pos = 0;

    bool eof() const { return pos >= buf.size(); }
    char peek() const { return buf[pos]; }

    void skip_ws_and_comments() {
        while (!eof()) {
            char c = buf[pos];
            if (c == '#') {
                while (!eof() && buf[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
    }

    long next_int(const char* what) {
        skip_ws_and_comments();
        if (eof()) throw parse_error(std::string("unexpected end of file reading ") + what, pos);
        std::size_t start = pos;
        long v = 0;
        bool any = false;
        while (!eof() && std::isdigit(static_cast<unsigned char>(buf[pos]))) {
            v = v * 10 + (buf[pos] - '0');
            ++pos;
            any = true;
        }
        if (!any) throw parse_error(std::string("expected integer for ") + what, start);
        return v;
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open file: " + path, 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ImageGrid parse_pgm(const std::string& buf, bool binary) {
    Cursor c{buf};
    c.skip_ws_and_comments();
    if (buf.size() < 2 || buf[c.pos] != 'P' || buf[c.pos + 1] != (binary ? '5' : '2'))
        throw parse_error(binary ? "expected P5 magic" : "expected P2 magic", c.pos);
    c.pos += 2;
    long w = c.next_int("width");
    long h = c.next_int("height");
    long maxval = c.next_int("maxval");
    if (w <= 0 || h <= 0) throw parse_error("non-positive dimensions", c.pos);
    if (maxval <= 0 || maxval > 255) throw parse_error("unsupported maxval (8-bit only)", c.pos);

    // PGM raster: h rows of w pixels; raster row = image y flipped is NOT applied,
    // we map raster row r (top first) to second coordinate, column to first, so
    // that a W x H file becomes n1 = W columns of x and n2 = H values of y; the
    // caller-facing convention stays row index = x, column index = y
    ImageGrid g;
    g.n1 = static_cast<int>(w);
    g.n2 = static_cast<int>(h);
    g.values.resize(static_cast<std::size_t>(w) * h);
    if (binary) {
        if (c.eof() || !std::isspace(static_cast<unsigned char>(buf[c.pos])))
            throw parse_error("expected whitespace before raster", c.pos);
        ++c.pos; // exactly one whitespace byte after maxval
        if (buf.size() - c.pos < static_cast<std::size_t>(w) * h)
            throw parse_error("truncated raster", buf.size());
        for (long r = 0; r < h; ++r)
            for (long col = 0; col < w; ++col) {
                unsigned char byte = static_cast<unsigned char>(buf[c.pos++]);
                // raster top row first: top corresponds to the largest y
                g.at(static_cast<int>(col + 1), static_cast<int>(h - r)) =
                    static_cast<double>(byte) / maxval;
            }
    } else {
        for (long r = 0; r < h; ++r)
            for (long col = 0; col < w; ++col) {
                long v = c.next_int("pixel");
                if (v > maxval) throw parse_error("pixel exceeds maxval", c.pos);
                g.at(static_cast<int>(col + 1), static_cast<int>(h - r)) =
                    static_cast<double>(v) / maxval;
            }
    }
    return g;
}

ImageGrid parse_csv(const std::string& buf) {
    std::vector<std::vector<double>> rows;
    std::size_t pos = 0, line_start = 0;
    while (pos < buf.size()) {
        std::size_t eol = buf.find('\n', pos);
        if (eol == std::string::npos) eol = buf.size();
        line_start = pos;
        std::string line = buf.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::size_t f = 0;
        while (f <= line.size()) {
            std::size_t comma = line.find(',', f);
            if (comma == std::string::npos) comma = line.size();
            std::string field = line.substr(f, comma - f);
            char* end = nullptr;
            double v = std::strtod(field.c_str(), &end);
            while (end && *end && std::isspace(static_cast<unsigned char>(*end))) ++end;
            if (end == field.c_str() || (end && *end))
                throw parse_error("bad numeric field '" + field + "'", line_start + f);
            if (!std::isfinite(v)) throw parse_error("non-finite value", line_start + f);
            row.push_back(v);
            if (comma == line.size()) break;
            f = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw parse_error("inconsistent row length", line_start);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw parse_error("empty csv", 0);
    ImageGrid g;
    g.n1 = static_cast<int>(rows.size());
    g.n2 = static_cast<int>(rows.front().size());
    g.values.resize(static_cast<std::size_t>(g.n1) * g.n2);
    for (int i1 = 1; i1 <= g.n1; ++i1)
        for (int i2 = 1; i2 <= g.n2; ++i2) g.at(i1, i2) = rows[i1 - 1][i2 - 1];
    return g;
}

} // namespace

ImageGrid load_image(const std::string& path, ImageFormat format) {
    std::string buf = read_file(path);
    switch (format) {
        case ImageFormat::pgm_ascii: return parse_pgm(buf, false);
        case ImageFormat::pgm_binary: return parse_pgm(buf, true);
        case ImageFormat::csv: return parse_csv(buf);
    }
    throw argument_error("load_image: unknown format");
}

ImageGrid load_image(const std::string& path) {
    std::string buf = read_file(path);
    if (buf.size() >= 2 && buf[0] == 'P' && buf[1] == '2') return parse_pgm(buf, false);
    if (buf.size() >= 2 && buf[0] == 'P' && buf[1] == '5') return parse_pgm(buf, true);
    return parse_csv(buf);
}

void save_csv(const ImageGrid& grid, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw argument_error("save_csv: cannot open " + path);
    for (int i1 = 1; i1 <= grid.n1; ++i1) {
        for (int i2 = 1; i2 <= grid.n2; ++i2)
            std::fprintf(f, "%.17g%s", grid.at(i1, i2), i2 < grid.n2 ? "," : "\n");
    }
    std::fclose(f);
}

double curve_separation(const SceneSpec& spec, int npts) {
    if (spec.curves.size() < 2) return std::numeric_limits<double>::infinity();
    double sep = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a + 1 < spec.curves.size(); ++a)
        for (std::size_t b = a + 1; b < spec.curves.size(); ++b)
            for (int i = 0; i <= npts; ++i) {
                double x = static_cast<double>(i) / npts;
                double d = std::abs(spec.curves[a].phi(x) - spec.curves[b].phi(x));
                sep = std::min(sep, d);
            }
    return sep;
}

} // namespace edgeband
