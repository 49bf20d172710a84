#pragma once
#include <cmath>
#include <cstdint>

namespace edgeband {

// xoshiro256++ with splitmix64 seeding; fixed algorithm so that seeded runs
// reproduce bit-identically across platforms (std distributions do not)
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) w = splitmix(x);
    }

    // independent substream: one generator per (seed, stream) pair
    static Rng substream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    }

    std::uint64_t next_u64() {
        std::uint64_t r = rotl(s_[0] + s_[3], 23) + s_[0];
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return r;
    }

    // uniform on (0,1), 53 random bits
    double uniform() { return ((next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0); }

    // standard normal, polar method with one cached spare
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Student t: normal over sqrt(chi^2_df / df)
    double student_t(int df) {
        double chi2 = 0.0;
        for (int i = 0; i < df; ++i) {
            double z = normal();
            chi2 += z * z;
        }
        return normal() / std::sqrt(chi2 / df);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    static std::uint64_t splitmix(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace edgeband
