#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace laplim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// Point sets are stored one point per row.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Bad or inconsistent input data (missing files, malformed values, domain violations).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure (non-convergence, singular system, rejection-sampler stall).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Deterministic random numbers.
//
// mt19937_64 plus hand-rolled output transforms, so that streams are
// reproducible across platforms and standard-library versions.
// ---------------------------------------------------------------------------
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Standard normal via Marsaglia polar method.
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
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t lim = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= lim);
        return x % n;
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Parallelism. LAPLACE_LIMITS_THREADS caps the worker count; chunk outputs
// are assembled in index order so results never depend on scheduling.
// ---------------------------------------------------------------------------
std::size_t max_threads();

/// Runs fn(begin, end) over a partition of [0, n). fn must only write to
/// disjoint, index-addressed slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Quadrature.
// ---------------------------------------------------------------------------

/// Adaptive Simpson on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 40);

/// Composite trapezoid over one period [a, b) for smooth periodic integrands
/// (spectrally accurate).
double periodic_trapezoid(const std::function<double(double)>& f, double a, double b, int n);

// ---------------------------------------------------------------------------
// Small numeric helpers.
// ---------------------------------------------------------------------------

/// Volume of the unit ball in R^m: pi^{m/2} / Gamma(m/2 + 1).
double unit_ball_volume(int m);

double median(std::vector<double> v);

/// Number of strict decreases between consecutive entries.
int count_decreases(const std::vector<double>& v);

/// FNV-1a 64-bit hash, used for config fingerprints in output sidecars.
std::uint64_t fnv1a_hash(const std::string& s);
std::string hash_hex(std::uint64_t h);

inline double sq(double x) { return x * x; }

}  // namespace laplim
