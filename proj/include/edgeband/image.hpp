#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace edgeband {

// gridded observations Y[i1][i2] at design points (i1/n1, i2/n2), i from 1;
// row index i1 is the first coordinate (x), column index i2 the second (y)
struct ImageGrid {
    int n1 = 0;
    int n2 = 0;
    std::vector<double> values; // row-major, size n1*n2

    double& at(int i1, int i2) { return values[static_cast<std::size_t>(i1 - 1) * n2 + (i2 - 1)]; }
    double at(int i1, int i2) const {
        return values[static_cast<std::size_t>(i1 - 1) * n2 + (i2 - 1)];
    }
    double x1(int i1) const { return static_cast<double>(i1) / n1; }
    double x2(int i2) const { return static_cast<double>(i2) / n2; }
    bool square() const { return n1 == n2; }
};

enum class NoiseFamily { gaussian, student_t };

struct NoiseSpec {
    NoiseFamily family = NoiseFamily::student_t;
    double sigma_tilde = 0.0;
    int df = 10;
    std::uint64_t seed = 0;

    // marginal standard deviation of one noise draw
    double sd() const;
};

struct JumpCurve {
    std::function<double(double)> phi; // location, maps [0,1] into (0,1)
    std::function<double(double)> tau; // height, positive
};

struct SceneSpec {
    std::function<double(double, double)> smooth; // m(x, y)
    std::vector<JumpCurve> curves;
    NoiseSpec noise;
};

// Y[i1][i2] = m + sum_k tau_k(x1) 1{x2 <= phi_k(x1)} + noise
ImageGrid generate(const SceneSpec& spec, int n);

enum class ImageFormat { pgm_ascii, pgm_binary, csv };

// PGM P2/P5 (8-bit, rescaled by maxval) or headerless CSV (row per line)
ImageGrid load_image(const std::string& path, ImageFormat format);
ImageGrid load_image(const std::string& path); // format from extension/magic

void save_csv(const ImageGrid& grid, const std::string& path);

// minimum pairwise separation of curve bands on a fine grid (Remark-style
// rho-separation check); returns +inf for fewer than two curves
double curve_separation(const SceneSpec& spec, int npts = 512);

} // namespace edgeband
