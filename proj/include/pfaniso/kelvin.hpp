#pragma once

// Kelvin (orthonormal Mandel) representation of symmetric second-order tensors
// and of fourth-order tensors with minor and major symmetry.
//
// Component ordering is fixed to (11, 22, 33, 23, 13, 12). Shear components of
// a SymTensor2 carry a factor sqrt(2); the shear-shear block of a
// KelvinOperator carries a factor 2 and the normal-shear block sqrt(2). With
// this scaling the Euclidean inner product of two Kelvin 6-vectors equals the
// full double contraction of the underlying tensors.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pfaniso {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kSqrt2 = std::numbers::sqrt2;

/// Kelvin slot of the symmetric index pair (i, j), zero-based.
constexpr int kelvin_slot(int i, int j) {
    if (i == j) return i;
    const int s = i + j;  // (1,2)->3, (0,2)->2, (0,1)->1
    return s == 3 ? 3 : (s == 2 ? 4 : 5);
}

/// Index pair of a Kelvin slot.
constexpr std::array<int, 2> kelvin_pair(int slot) {
    constexpr std::array<std::array<int, 2>, 6> pairs{{{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};
    return pairs[static_cast<std::size_t>(slot)];
}

/// Kelvin scaling of a slot: 1 for normal slots, sqrt(2) for shear slots.
constexpr double kelvin_weight(int slot) { return slot < 3 ? 1.0 : kSqrt2; }

class SymTensor2 {
public:
    SymTensor2() : v_(Vec6::Zero()) {}
    explicit SymTensor2(const Vec6& kelvin) : v_(kelvin) {}
    SymTensor2(double t11, double t22, double t33, double k23, double k13, double k12) {
        v_ << t11, t22, t33, k23, k13, k12;
    }

    static SymTensor2 zero() { return SymTensor2{}; }
    static SymTensor2 identity() { return SymTensor2{1, 1, 1, 0, 0, 0}; }

    const Vec6& kelvin() const { return v_; }
    Vec6& kelvin() { return v_; }
    double operator[](int i) const { return v_[i]; }
    double& operator[](int i) { return v_[i]; }

    /// Tensor component t_ij (no Kelvin weight).
    double component(int i, int j) const {
        const int s = kelvin_slot(i, j);
        return v_[s] / kelvin_weight(s);
    }

    Mat3 dense() const {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = component(i, j);
        return m;
    }

    double trace() const { return v_[0] + v_[1] + v_[2]; }
    double norm() const { return v_.norm(); }
    SymTensor2 deviator() const {
        SymTensor2 d = *this;
        const double m = trace() / 3.0;
        for (int i = 0; i < 3; ++i) d.v_[i] -= m;
        return d;
    }

    SymTensor2& operator+=(const SymTensor2& o) { v_ += o.v_; return *this; }
    SymTensor2& operator-=(const SymTensor2& o) { v_ -= o.v_; return *this; }
    SymTensor2& operator*=(double s) { v_ *= s; return *this; }
    friend SymTensor2 operator+(SymTensor2 a, const SymTensor2& b) { return a += b; }
    friend SymTensor2 operator-(SymTensor2 a, const SymTensor2& b) { return a -= b; }
    friend SymTensor2 operator-(const SymTensor2& a) { return SymTensor2{Vec6(-a.v_)}; }
    friend SymTensor2 operator*(double s, SymTensor2 a) { return a *= s; }
    friend SymTensor2 operator*(SymTensor2 a, double s) { return a *= s; }

private:
    Vec6 v_;
};

/// Full double contraction a : b.
inline double dot(const SymTensor2& a, const SymTensor2& b) { return a.kelvin().dot(b.kelvin()); }

/// Vectorize a symmetric 3x3 matrix; rejects relative asymmetry above 1e-10.
inline SymTensor2 to_kelvin(const Mat3& dense) {
    const double scale = std::max(dense.norm(), 1e-300);
    if ((dense - dense.transpose()).norm() > 1e-10 * scale)
        throw std::invalid_argument("to_kelvin: input is not symmetric");
    const Mat3 s = 0.5 * (dense + dense.transpose());
    return SymTensor2{s(0, 0), s(1, 1), s(2, 2), kSqrt2 * s(1, 2), kSqrt2 * s(0, 2), kSqrt2 * s(0, 1)};
}

/// Kelvin vector of the dyad n (x) n for a unit vector n.
inline SymTensor2 dyad(const Vec3& n) {
    return SymTensor2{n[0] * n[0], n[1] * n[1], n[2] * n[2],
                      kSqrt2 * n[1] * n[2], kSqrt2 * n[0] * n[2], kSqrt2 * n[0] * n[1]};
}

/// Kelvin vector of (a (x) b + b (x) a) / sqrt(2); unit norm for orthonormal a, b.
inline SymTensor2 sym_dyad(const Vec3& a, const Vec3& b) {
    Mat3 m = (a * b.transpose() + b * a.transpose()) / kSqrt2;
    return to_kelvin(m);
}

class KelvinOperator {
public:
    KelvinOperator() : m_(Mat6::Zero()) {}
    /// Stores the exactly symmetrized matrix; the caller is responsible for
    /// passing a (nearly) symmetric input, see is_symmetric().
    explicit KelvinOperator(const Mat6& m) : m_(0.5 * (m + m.transpose())) {}

    static KelvinOperator zero() { return KelvinOperator{}; }
    static KelvinOperator identity() { return KelvinOperator{Mat6::Identity()}; }
    /// Unsymmetrized wrapper, for intermediate products only.
    static KelvinOperator raw(const Mat6& m) {
        KelvinOperator k;
        k.m_ = m;
        return k;
    }

    const Mat6& matrix() const { return m_; }
    double operator()(int i, int j) const { return m_(i, j); }
    double norm() const { return m_.norm(); }

    /// Fourth-order component A_ijkl recovered from the Kelvin matrix.
    double component(int i, int j, int k, int l) const {
        const int a = kelvin_slot(i, j);
        const int b = kelvin_slot(k, l);
        return m_(a, b) / (kelvin_weight(a) * kelvin_weight(b));
    }

    SymTensor2 operator*(const SymTensor2& t) const { return SymTensor2{Vec6(m_ * t.kelvin())}; }
    KelvinOperator operator*(const KelvinOperator& o) const { return raw(m_ * o.m_); }
    KelvinOperator transpose() const { return raw(m_.transpose()); }

    KelvinOperator& operator+=(const KelvinOperator& o) { m_ += o.m_; return *this; }
    KelvinOperator& operator-=(const KelvinOperator& o) { m_ -= o.m_; return *this; }
    friend KelvinOperator operator+(KelvinOperator a, const KelvinOperator& b) { return a += b; }
    friend KelvinOperator operator-(KelvinOperator a, const KelvinOperator& b) { return a -= b; }
    friend KelvinOperator operator*(double s, const KelvinOperator& a) { return raw(s * a.m_); }

private:
    Mat6 m_;
};

/// Outer product a (x) b as a Kelvin operator.
inline KelvinOperator outer(const SymTensor2& a, const SymTensor2& b) {
    return KelvinOperator::raw(a.kelvin() * b.kelvin().transpose());
}

inline bool is_symmetric(const Mat6& m, double rel_tol = 1e-12) {
    return (m - m.transpose()).norm() <= rel_tol * std::max(m.norm(), 1e-300);
}

struct Spectral2 {
    Vec3 values;                 // descending
    std::array<Vec3, 3> vectors; // orthonormal, vectors[i] belongs to values[i]
};

struct Spectral4 {
    Vec6 values;                        // descending
    std::array<SymTensor2, 6> tensors;  // orthonormal eigentensors
};

namespace detail {

// Largest-magnitude component positive; ties go to the first index.
template <class V>
void fix_sign(V& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    if (v[best] < 0) v = -v;
}

template <int N>
void sorted_eigen(const Eigen::Matrix<double, N, N>& a, Eigen::Matrix<double, N, 1>& values,
                  std::array<Eigen::Matrix<double, N, 1>, N>& vectors) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(a);
    // Eigen returns ascending order.
    for (int i = 0; i < N; ++i) {
        values[i] = es.eigenvalues()[N - 1 - i];
        Eigen::Matrix<double, N, 1> v = es.eigenvectors().col(N - 1 - i);
        fix_sign(v);
        vectors[static_cast<std::size_t>(i)] = v;
    }
}

}  // namespace detail

inline Spectral2 eig_sym2(const SymTensor2& t) {
    Spectral2 out;
    detail::sorted_eigen<3>(t.dense(), out.values, out.vectors);
    return out;
}

inline Spectral4 eig_sym4(const KelvinOperator& a) {
    Spectral4 out;
    std::array<Vec6, 6> vecs;
    detail::sorted_eigen<6>(a.matrix(), out.values, vecs);
    for (std::size_t i = 0; i < 6; ++i) out.tensors[i] = SymTensor2{vecs[i]};
    return out;
}

/// Relative threshold below which an eigenvalue of an operator counts as
/// non-positive.
inline constexpr double kSpdTolerance = 1e-10;

/// Degenerate-eigenvalue tolerance for second-order spectra.
inline double eigen_tie_tolerance(const Vec3& values) {
    return 1e-9 * std::max(values.cwiseAbs().maxCoeff(), 1.0);
}

/// Apply a scalar function to the spectrum of a symmetric operator.
template <class F>
KelvinOperator spectral_function(const Spectral4& sp, F&& f) {
    Mat6 m = Mat6::Zero();
    for (int i = 0; i < 6; ++i) {
        const Vec6& w = sp.tensors[static_cast<std::size_t>(i)].kelvin();
        m += f(sp.values[i]) * (w * w.transpose());
    }
    return KelvinOperator{m};
}

inline void require_spd(const Spectral4& sp, const char* what) {
    const double lmax = sp.values[0];
    if (!(lmax > 0.0) || !(sp.values[5] > kSpdTolerance * lmax))
        throw std::domain_error(std::string(what) + ": operator is not symmetric positive-definite");
}

/// Square root of a symmetric positive-definite operator.
inline KelvinOperator operator_sqrt(const KelvinOperator& a) {
    const Spectral4 sp = eig_sym4(a);
    require_spd(sp, "operator_sqrt");
    return spectral_function(sp, [](double l) { return std::sqrt(l); });
}

inline KelvinOperator operator_inverse_sqrt(const KelvinOperator& a) {
    const Spectral4 sp = eig_sym4(a);
    require_spd(sp, "operator_inverse_sqrt");
    return spectral_function(sp, [](double l) { return 1.0 / std::sqrt(l); });
}

inline KelvinOperator operator_inverse(const KelvinOperator& a) {
    const Spectral4 sp = eig_sym4(a);
    require_spd(sp, "operator_inverse");
    return spectral_function(sp, [](double l) { return 1.0 / l; });
}

/// Kelvin transformation matrix for a rotation of the basis about z by alpha:
/// components in the new basis are P times components in the old one.
inline KelvinOperator rotation_about_z(double alpha) {
    const double c = std::cos(alpha);
    const double s = std::sin(alpha);
    Mat6 p;
    // clang-format off
    p <<  c * c,             s * s,            0, 0,  0, kSqrt2 * c * s,
          s * s,             c * c,            0, 0,  0, -kSqrt2 * c * s,
          0,                 0,                1, 0,  0, 0,
          0,                 0,                0, c, -s, 0,
          0,                 0,                0, s,  c, 0,
         -kSqrt2 * c * s,    kSqrt2 * c * s,   0, 0,  0, c * c - s * s;
    // clang-format on
    return KelvinOperator::raw(p);
}

inline bool is_orthogonal(const KelvinOperator& p, double tol = 1e-12) {
    return (p.matrix() * p.matrix().transpose() - Mat6::Identity()).norm() <= tol;
}

/// P A P^T; P must be orthogonal in Kelvin 6-space.
inline KelvinOperator rotate_operator(const KelvinOperator& a, const KelvinOperator& p) {
    if (!is_orthogonal(p)) throw std::invalid_argument("rotate_operator: P is not orthogonal");
    return KelvinOperator{p.matrix() * a.matrix() * p.matrix().transpose()};
}

inline SymTensor2 rotate_tensor(const SymTensor2& t, const KelvinOperator& p) { return p * t; }

/// Isotropic stiffness lambda 1(x)1 + 2 mu I in Kelvin form.
inline KelvinOperator isotropic_operator(double lambda, double mu) {
    const Vec6 one = SymTensor2::identity().kelvin();
    return KelvinOperator{lambda * one * one.transpose() + 2.0 * mu * Mat6::Identity()};
}

}  // namespace pfaniso
