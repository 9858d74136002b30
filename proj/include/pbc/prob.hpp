// Exact finite-alphabet probability machinery: distributions, entropy, mutual
// information, Bhattacharyya parameter, total-variation and KL divergences.
// Log base is 2 throughout; rates and entropies are in bits. 0*log(0) = 0.
#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pbc {

inline constexpr double kProbTol = 1e-12;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : Error {
    using Error::Error;
};

namespace detail {
inline void check_prob_vector(std::span<const double> p, const std::string& what) {
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0 || !std::isfinite(v)) throw ValidationError(what + ": negative or non-finite mass");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kProbTol) {
        throw ValidationError(what + ": masses sum to " + std::to_string(sum) + ", not 1 within 1e-12");
    }
}
}  // namespace detail

class Pmf {
  public:
    explicit Pmf(std::vector<double> mass) : mass_(std::move(mass)) {
        if (mass_.empty()) throw ValidationError("Pmf: empty support");
        detail::check_prob_vector(mass_, "Pmf");
    }

    int size() const { return static_cast<int>(mass_.size()); }
    double operator[](int i) const { return mass_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& mass() const { return mass_; }

    bool operator==(const Pmf&) const = default;

  private:
    std::vector<double> mass_;
};

// Row-stochastic kernel: rows[r] is the output distribution given input r.
class ConditionalPmf {
  public:
    ConditionalPmf(int input_size, int output_size, std::vector<double> rows)
        : in_(input_size), out_(output_size), rows_(std::move(rows)) {
        if (in_ <= 0 || out_ <= 0) throw ValidationError("ConditionalPmf: non-positive size");
        if (rows_.size() != static_cast<std::size_t>(in_) * static_cast<std::size_t>(out_))
            throw ValidationError("ConditionalPmf: row data size mismatch");
        for (int r = 0; r < in_; ++r) detail::check_prob_vector(row(r), "ConditionalPmf row");
    }

    int input_size() const { return in_; }
    int output_size() const { return out_; }
    double at(int r, int c) const { return rows_[static_cast<std::size_t>(r) * out_ + c]; }
    std::span<const double> row(int r) const {
        return {rows_.data() + static_cast<std::size_t>(r) * out_, static_cast<std::size_t>(out_)};
    }

    bool operator==(const ConditionalPmf&) const = default;

  private:
    int in_, out_;
    std::vector<double> rows_;  // in_ x out_, row-major
};

// Joint distribution over a pair (X,Y), dense.
struct Joint2 {
    int nx = 0, ny = 0;
    std::vector<double> p;  // nx * ny, row-major over x

    Joint2() = default;
    Joint2(int x, int y) : nx(x), ny(y), p(static_cast<std::size_t>(x) * y, 0.0) {}

    double& at(int x, int y) { return p[static_cast<std::size_t>(x) * ny + y]; }
    double at(int x, int y) const { return p[static_cast<std::size_t>(x) * ny + y]; }

    void validate() const {
        double sum = 0.0;
        for (double v : p) {
            if (v < -kProbTol || !std::isfinite(v)) throw ValidationError("Joint2: negative entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kProbTol) throw ValidationError("Joint2: not normalized");
    }

    std::vector<double> marginal_x() const {
        std::vector<double> m(static_cast<std::size_t>(nx), 0.0);
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) m[static_cast<std::size_t>(x)] += at(x, y);
        return m;
    }
    std::vector<double> marginal_y() const {
        std::vector<double> m(static_cast<std::size_t>(ny), 0.0);
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) m[static_cast<std::size_t>(y)] += at(x, y);
        return m;
    }
};

// Joint over a triple (X,Y,Z); Z is the conditioning variable in
// conditional_mutual_information.
struct Joint3 {
    int nx = 0, ny = 0, nz = 0;
    std::vector<double> p;

    Joint3() = default;
    Joint3(int x, int y, int z) : nx(x), ny(y), nz(z), p(static_cast<std::size_t>(x) * y * z, 0.0) {}

    double& at(int x, int y, int z) { return p[(static_cast<std::size_t>(x) * ny + y) * nz + z]; }
    double at(int x, int y, int z) const { return p[(static_cast<std::size_t>(x) * ny + y) * nz + z]; }

    void validate() const {
        double sum = 0.0;
        for (double v : p) {
            if (v < -kProbTol || !std::isfinite(v)) throw ValidationError("Joint3: negative entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kProbTol) throw ValidationError("Joint3: not normalized");
    }
};

inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

inline double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) h -= xlog2x(v);
    return h;
}

inline double entropy(const Pmf& p) { return entropy(std::span<const double>(p.mass())); }

inline double binary_entropy(double p) { return -xlog2x(p) - xlog2x(1.0 - p); }

// H(X|Y) from the joint.
inline double conditional_entropy(const Joint2& j) {
    j.validate();
    double h = 0.0;
    auto py = j.marginal_y();
    for (int y = 0; y < j.ny; ++y) {
        if (py[static_cast<std::size_t>(y)] <= 0.0) continue;
        for (int x = 0; x < j.nx; ++x) {
            double v = j.at(x, y);
            if (v > 0.0) h += v * std::log2(py[static_cast<std::size_t>(y)] / v);
        }
    }
    return h;
}

inline double mutual_information(const Joint2& j) {
    double i = entropy(std::span<const double>(j.marginal_x())) - conditional_entropy(j);
    return i < 0.0 ? 0.0 : i;  // clip the -1e-12-scale numeric floor
}

// I(X;Y|Z) = sum_z p(z) I(X;Y|Z=z).
inline double conditional_mutual_information(const Joint3& j) {
    j.validate();
    double total = 0.0;
    for (int z = 0; z < j.nz; ++z) {
        double pz = 0.0;
        for (int x = 0; x < j.nx; ++x)
            for (int y = 0; y < j.ny; ++y) pz += j.at(x, y, z);
        if (pz <= 0.0) continue;
        Joint2 slice(j.nx, j.ny);
        for (int x = 0; x < j.nx; ++x)
            for (int y = 0; y < j.ny; ++y) slice.at(x, y) = j.at(x, y, z) / pz;
        total += pz * mutual_information(slice);
    }
    return total < 0.0 ? 0.0 : total;
}

// Z(X|Y) = 2 sum_y sqrt(p(0,y) p(1,y)); requires binary X.
inline double bhattacharyya(const Joint2& j) {
    if (j.nx != 2) throw ValidationError("bhattacharyya: X must be binary");
    j.validate();
    double z = 0.0;
    for (int y = 0; y < j.ny; ++y) z += std::sqrt(j.at(0, y) * j.at(1, y));
    return 2.0 * z;
}

inline double tv_distance(const Pmf& p, const Pmf& q) {
    if (p.size() != q.size()) throw ValidationError("tv_distance: mismatched supports");
    double d = 0.0;
    for (int i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
    return 0.5 * d;
}

inline double kl_divergence(const Pmf& p, const Pmf& q) {
    if (p.size() != q.size()) throw ValidationError("kl_divergence: mismatched supports");
    double d = 0.0;
    for (int i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        d += p[i] * std::log2(p[i] / q[i]);
    }
    return d;
}

// ||P_{X,Y} - Q_{X,Y}|| where both joints share the kernel p(y|x); the pair
// returned is (joint-level TV, input-level TV) and the two are equal.
inline std::pair<double, double> tv_channel_extension_identity(const Pmf& px, const Pmf& qx,
                                                               const ConditionalPmf& channel) {
    if (px.size() != qx.size()) throw ValidationError("tv_channel_extension_identity: support mismatch");
    if (channel.input_size() != px.size())
        throw ValidationError("tv_channel_extension_identity: channel input size mismatch");
    double lhs = 0.0;
    for (int x = 0; x < px.size(); ++x)
        for (int y = 0; y < channel.output_size(); ++y)
            lhs += std::abs(px[x] * channel.at(x, y) - qx[x] * channel.at(x, y));
    return {0.5 * lhs, tv_distance(px, qx)};
}

// Binary joint law p(w) p(v|w) p(x|v); the W -> V -> X chain is structural
// (there is no way to express a direct W -> X dependence).
struct LayeredDistribution {
    Pmf pw;
    ConditionalPmf pv_given_w;
    ConditionalPmf px_given_v;

    LayeredDistribution(Pmf w, ConditionalPmf vw, ConditionalPmf xv)
        : pw(std::move(w)), pv_given_w(std::move(vw)), px_given_v(std::move(xv)) {
        if (pw.size() != 2 || pv_given_w.input_size() != 2 || pv_given_w.output_size() != 2 ||
            px_given_v.input_size() != 2 || px_given_v.output_size() != 2)
            throw ValidationError("LayeredDistribution: all alphabets must be binary");
    }

    double joint(int w, int v, int x) const { return pw[w] * pv_given_w.at(w, v) * px_given_v.at(v, x); }

    Pmf pv() const {
        std::vector<double> m(2, 0.0);
        for (int w = 0; w < 2; ++w)
            for (int v = 0; v < 2; ++v) m[static_cast<std::size_t>(v)] += pw[w] * pv_given_w.at(w, v);
        return Pmf(m);
    }

    Pmf px() const {
        std::vector<double> m(2, 0.0);
        auto v_m = pv();
        for (int v = 0; v < 2; ++v)
            for (int x = 0; x < 2; ++x) m[static_cast<std::size_t>(x)] += v_m[v] * px_given_v.at(v, x);
        return Pmf(m);
    }

    bool operator==(const LayeredDistribution&) const = default;
};

// Convenience constructors for binary kernels.
inline ConditionalPmf bsc_kernel(double eps) {
    return ConditionalPmf(2, 2, {1.0 - eps, eps, eps, 1.0 - eps});
}

inline ConditionalPmf identity_kernel(int size = 2) {
    std::vector<double> rows(static_cast<std::size_t>(size) * size, 0.0);
    for (int i = 0; i < size; ++i) rows[static_cast<std::size_t>(i) * size + i] = 1.0;
    return ConditionalPmf(size, size, std::move(rows));
}

// Binary-input erasure kernel; output alphabet {0, 1, erasure=2}.
inline ConditionalPmf bec_kernel(double eps) {
    return ConditionalPmf(2, 3, {1.0 - eps, 0.0, eps, 0.0, 1.0 - eps, eps});
}

// Symmetric confusion kernel over an arbitrary alphabet: keep with
// probability 1-eps, otherwise uniform over the other symbols.
inline ConditionalPmf symmetric_kernel(int size, double eps) {
    std::vector<double> rows(static_cast<std::size_t>(size) * size, size > 1 ? eps / (size - 1) : 0.0);
    for (int i = 0; i < size; ++i) rows[static_cast<std::size_t>(i) * size + i] = 1.0 - eps;
    return ConditionalPmf(size, size, std::move(rows));
}

// p(v=1|w=0), p(v=1|w=1) style shorthand for binary conditionals.
inline ConditionalPmf binary_kernel(double p1_given_0, double p1_given_1) {
    return ConditionalPmf(2, 2, {1.0 - p1_given_0, p1_given_0, 1.0 - p1_given_1, p1_given_1});
}

}  // namespace pbc
