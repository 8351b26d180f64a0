#pragma once

// Tension-compression splits of an anisotropic linear elastic energy.
//
// All nontrivial laws work in the transformed strain space eps~ = C^{1/2} eps,
// where the energy is Euclidean (Psi = 1/2 eps~ . eps~). A split of eps~ into
// mutually orthogonal parts is mapped back with C^{-1/2}, which keeps the
// physical parts C-orthogonal: C eps^t . eps^c = 0.

#include "pfaniso/elasticity.hpp"
#include "pfaniso/kelvin.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>

namespace pfaniso {

enum class SplitLaw { none, vol_dev, no_tension };

inline std::string_view to_string(SplitLaw law) {
    switch (law) {
        case SplitLaw::none: return "none";
        case SplitLaw::vol_dev: return "vol_dev";
        case SplitLaw::no_tension: return "no_tension";
    }
    return "unknown";
}

inline SplitLaw parse_split_law(std::string_view s) {
    if (s == "none" || s == "bourdin") return SplitLaw::none;
    if (s == "vol_dev" || s == "voldev" || s == "volumetric-deviatoric") return SplitLaw::vol_dev;
    if (s == "no_tension" || s == "notension" || s == "no-tension") return SplitLaw::no_tension;
    throw std::invalid_argument("unknown split law '" + std::string(s) + "'");
}

/// Crack-driving (t) and persistent (c) parts at a material point.
struct SplitState {
    SymTensor2 eps_t, eps_c;
    SymTensor2 sigma_t, sigma_c;
    KelvinOperator C_t, C_c;
    double psi_t = 0.0, psi_c = 0.0;
    /// Projection tensors d eps~^{t,c} / d eps~ in the transformed space.
    KelvinOperator D_t, D_c;
    /// Transformed strain and its parts.
    SymTensor2 eps_tilde, eps_tilde_t, eps_tilde_c;
};

/// Heaviside with H(0) = 1.
inline double heaviside(double a) { return a >= 0.0 ? 1.0 : 0.0; }

namespace detail {

inline SplitState finish(const ElasticModel& model, const SymTensor2& eps) {
    SplitState s;
    s.eps_tilde = model.C_half() * eps;
    return s;
}

// eps^{t,c} = C^{-1/2} eps~^{t,c}; sigma^{t,c} = C^{1/2} eps~^{t,c} (= C eps^{t,c}).
inline void map_back(const ElasticModel& model, SplitState& s) {
    s.eps_t = model.C_half_inv() * s.eps_tilde_t;
    s.eps_c = model.C_half_inv() * s.eps_tilde_c;
    s.sigma_t = model.C_half() * s.eps_tilde_t;
    s.sigma_c = model.C_half() * s.eps_tilde_c;
    s.psi_t = 0.5 * dot(s.eps_tilde_t, s.eps_tilde_t);
    s.psi_c = 0.5 * dot(s.eps_tilde_c, s.eps_tilde_c);
}

inline KelvinOperator sandwich(const KelvinOperator& half, const KelvinOperator& d) {
    return KelvinOperator{half.matrix() * d.matrix() * half.matrix()};
}

}  // namespace detail

/// Symmetric response: everything drives the crack.
inline SplitState split_none(const ElasticModel& model, const SymTensor2& eps) {
    SplitState s = detail::finish(model, eps);
    s.eps_tilde_t = s.eps_tilde;
    s.eps_tilde_c = SymTensor2::zero();
    s.D_t = KelvinOperator::identity();
    s.D_c = KelvinOperator::zero();
    s.eps_t = eps;
    s.eps_c = SymTensor2::zero();
    s.sigma_t = model.C() * eps;
    s.sigma_c = SymTensor2::zero();
    s.C_t = model.C();
    s.C_c = KelvinOperator::zero();
    s.psi_t = model.energy(eps);
    s.psi_c = 0.0;
    return s;
}

/// Volumetric-deviatoric projection tensors for a transformed trace.
inline std::pair<KelvinOperator, KelvinOperator> voldev_projections(double trace_tilde) {
    const Vec6 one = SymTensor2::identity().kelvin();
    const Mat6 vol = one * one.transpose() / 3.0;
    const Mat6 dt = heaviside(trace_tilde) * vol + (Mat6::Identity() - vol);
    const Mat6 dc = (1.0 - heaviside(trace_tilde)) * vol;
    return {KelvinOperator{dt}, KelvinOperator{dc}};
}

/// Volumetric-deviatoric split in the transformed space: the positive part of
/// the transformed volumetric strain and the full transformed deviator drive
/// the crack; a negative transformed volumetric strain persists.
inline SplitState split_voldev(const ElasticModel& model, const SymTensor2& eps) {
    SplitState s = detail::finish(model, eps);
    const double tr = s.eps_tilde.trace();
    const SymTensor2 one = SymTensor2::identity();
    s.eps_tilde_t = s.eps_tilde.deviator() + (std::max(tr, 0.0) / 3.0) * one;
    s.eps_tilde_c = (std::min(tr, 0.0) / 3.0) * one;
    std::tie(s.D_t, s.D_c) = voldev_projections(tr);
    detail::map_back(model, s);

    // C^t = (d eps^t / d eps)^T C (d eps^t / d eps), d eps^t / d eps = C^{-1/2} D^t C^{1/2}.
    const Mat6 jt = model.C_half_inv().matrix() * s.D_t.matrix() * model.C_half().matrix();
    const Mat6 jc = model.C_half_inv().matrix() * s.D_c.matrix() * model.C_half().matrix();
    s.C_t = KelvinOperator{jt.transpose() * model.C().matrix() * jt};
    s.C_c = KelvinOperator{jc.transpose() * model.C().matrix() * jc};
    return s;
}

/// Coefficient (f_j - f_i) / (x_j - x_i) of the spectral derivative, replaced
/// by its limit H(+-x_i) when the eigenvalues are numerically repeated.
inline double divided_difference(double fi, double fj, double xi, double xj, double limit, double tie_tol) {
    if (std::abs(xj - xi) < tie_tol) return limit;
    return (fj - fi) / (xj - xi);
}

/// No-tension projection tensors for a transformed strain with spectrum sp.
inline std::pair<KelvinOperator, KelvinOperator> notension_projections(const Spectral2& sp) {
    const double tie = eigen_tie_tolerance(sp.values);
    Mat6 dt = Mat6::Zero();
    Mat6 dc = Mat6::Zero();
    std::array<double, 3> a{}, b{};
    for (int i = 0; i < 3; ++i) {
        const double e = sp.values[i];
        a[static_cast<std::size_t>(i)] = std::max(e, 0.0);
        b[static_cast<std::size_t>(i)] = e - a[static_cast<std::size_t>(i)];
        const Vec6 m = dyad(sp.vectors[static_cast<std::size_t>(i)]).kelvin();
        dt += heaviside(e) * m * m.transpose();
        dc += (1.0 - heaviside(e)) * m * m.transpose();
    }
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const auto ui = static_cast<std::size_t>(i);
            const auto uj = static_cast<std::size_t>(j);
            const double ei = sp.values[i];
            const double ej = sp.values[j];
            const double ct = divided_difference(a[ui], a[uj], ei, ej, heaviside(ei), tie);
            const double cc = divided_difference(b[ui], b[uj], ei, ej, 1.0 - heaviside(ei), tie);
            const Vec6 w = sym_dyad(sp.vectors[ui], sp.vectors[uj]).kelvin();
            dt += ct * w * w.transpose();
            dc += cc * w * w.transpose();
        }
    return {KelvinOperator{dt}, KelvinOperator{dc}};
}

/// No-tension (masonry-like) split: the positive semi-definite spectral part
/// of the transformed strain drives the crack.
inline SplitState split_notension(const ElasticModel& model, const SymTensor2& eps) {
    SplitState s = detail::finish(model, eps);
    const Spectral2 sp = eig_sym2(s.eps_tilde);
    SymTensor2 et, ec;
    for (int i = 0; i < 3; ++i) {
        const double e = sp.values[i];
        const SymTensor2 m = dyad(sp.vectors[static_cast<std::size_t>(i)]);
        et += std::max(e, 0.0) * m;
        ec += std::min(e, 0.0) * m;
    }
    s.eps_tilde_t = et;
    s.eps_tilde_c = ec;
    std::tie(s.D_t, s.D_c) = notension_projections(sp);
    detail::map_back(model, s);
    s.C_t = detail::sandwich(model.C_half(), s.D_t);
    s.C_c = detail::sandwich(model.C_half(), s.D_c);
    return s;
}

inline SplitState split(SplitLaw law, const ElasticModel& model, const SymTensor2& eps) {
    switch (law) {
        case SplitLaw::none: return split_none(model, eps);
        case SplitLaw::vol_dev: return split_voldev(model, eps);
        case SplitLaw::no_tension: return split_notension(model, eps);
    }
    throw std::invalid_argument("split: unknown law");
}

/// Quadratic degradation g(d) = (1 - d)^2.
struct QuadraticDegradation {
    double value(double d) const { return (1.0 - d) * (1.0 - d); }
    double deriv(double d) const { return -2.0 * (1.0 - d); }
    double deriv2(double /*d*/) const { return 2.0; }
};

inline void require_damage(double d) {
    if (!(d >= 0.0 && d <= 1.0)) throw std::out_of_range("damage must lie in [0, 1]");
}

/// g(d) sigma^t + sigma^c.
template <class Degradation = QuadraticDegradation>
SymTensor2 degraded_stress(const SplitState& s, double d, const Degradation& g = {}) {
    require_damage(d);
    return g.value(d) * s.sigma_t + s.sigma_c;
}

/// g(d) C^t + C^c.
template <class Degradation = QuadraticDegradation>
KelvinOperator degraded_tangent(const SplitState& s, double d, const Degradation& g = {}) {
    require_damage(d);
    return KelvinOperator{g.value(d) * s.C_t.matrix() + s.C_c.matrix()};
}

// ---------------------------------------------------------------------------
// Variational oracle

namespace detail {

// Cyclic Jacobi eigensolver for symmetric 3x3 matrices. Kept separate from the
// library eigensolver so the oracle does not share its code path.
inline void jacobi_eigen(Mat3 a, Vec3& values, Mat3& vectors) {
    vectors.setIdentity();
    for (int sweep = 0; sweep < 100; ++sweep) {
        const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
        if (off <= 1e-300 || off <= 1e-36 * a.squaredNorm()) break;
        for (int p = 0; p < 2; ++p)
            for (int q = p + 1; q < 3; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                Mat3 j = Mat3::Identity();
                j(p, p) = c;
                j(q, q) = c;
                j(p, q) = s;
                j(q, p) = -s;
                a = j.transpose() * a * j;
                vectors = vectors * j;
            }
    }
    values = a.diagonal();
}

}  // namespace detail

/// Euclidean projection of a transformed strain onto the crack-driving cone
/// of `law` (trace >= 0 for vol_dev, positive semi-definite for no_tension).
inline SymTensor2 project_transformed_cone(SplitLaw law, const SymTensor2& y) {
    switch (law) {
        case SplitLaw::none: return y;
        case SplitLaw::vol_dev: {
            const double tr = y.trace();
            return tr >= 0.0 ? y : y - (tr / 3.0) * SymTensor2::identity();
        }
        case SplitLaw::no_tension: {
            Vec3 values;
            Mat3 vectors;
            detail::jacobi_eigen(y.dense(), values, vectors);
            Mat3 p = Mat3::Zero();
            for (int i = 0; i < 3; ++i)
                if (values[i] > 0.0) p += values[i] * vectors.col(i) * vectors.col(i).transpose();
            return to_kelvin(0.5 * (p + p.transpose()));
        }
    }
    throw std::invalid_argument("project_transformed_cone: unknown law");
}

/// Crack-driving strain as the C-energy-norm projection of eps onto the
/// crack-driving set: computed as the Euclidean cone projection of C^{1/2} eps
/// mapped back by C^{-1/2}.
inline SymTensor2 oracle_projection(SplitLaw law, const ElasticModel& model, const SymTensor2& eps) {
    if (law == SplitLaw::none) throw std::invalid_argument("oracle_projection: law must be vol_dev or no_tension");
    return model.C_half_inv() * project_transformed_cone(law, model.C_half() * eps);
}

// ---------------------------------------------------------------------------
// Two-dimensional closed form (genuinely 2D Kelvin 3-space: 11, 22, sqrt2 12)

using Vec3K = Eigen::Vector3d;
using Mat3K = Eigen::Matrix3d;

struct Split2D {
    Vec3K eps_t, eps_c, sigma_t, sigma_c;
    Mat3K D_t, D_c, C_t, C_c;
    double psi_t = 0.0, psi_c = 0.0;
};

/// No-tension split for a 2D model with Kelvin stiffness `c` (3x3), using the
/// coordinate-free closed form of the 2D projection tensors.
inline Split2D split_notension_2d(const Mat3K& c, const Vec3K& eps) {
    Eigen::SelfAdjointEigenSolver<Mat3K> ces(c);
    if (!(ces.eigenvalues().minCoeff() > kSpdTolerance * ces.eigenvalues().maxCoeff()))
        throw InadmissibleMaterial("split_notension_2d: stiffness is not positive-definite");
    const Mat3K half = ces.eigenvectors() * ces.eigenvalues().cwiseSqrt().asDiagonal() * ces.eigenvectors().transpose();
    const Mat3K half_inv = ces.eigenvectors() * ces.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                           ces.eigenvectors().transpose();
    const Vec3K et = half * eps;

    Eigen::Matrix2d m;
    m << et[0], et[2] / kSqrt2, et[2] / kSqrt2, et[1];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
    const double e1 = es.eigenvalues()[1];
    const double e2 = es.eigenvalues()[0];
    auto kelvin_dyad = [](const Eigen::Vector2d& n) { return Vec3K(n[0] * n[0], n[1] * n[1], kSqrt2 * n[0] * n[1]); };
    const Vec3K M1 = kelvin_dyad(es.eigenvectors().col(1));
    const Vec3K M2 = kelvin_dyad(es.eigenvectors().col(0));
    const Mat3K I = Mat3K::Identity();
    const Mat3K P1 = M1 * M1.transpose();
    const Mat3K P2 = M2 * M2.transpose();
    const double a1 = std::max(e1, 0.0), a2 = std::max(e2, 0.0);
    const double b1 = e1 - a1, b2 = e2 - a2;

    Split2D out;
    const double tie = 1e-9 * std::max({std::abs(e1), std::abs(e2), 1.0});
    if (std::abs(e1 - e2) >= tie) {
        out.D_t = (a1 - a2) / (e1 - e2) * (I - P1 - P2) + heaviside(e1) * P1 + heaviside(e2) * P2;
        out.D_c = (b1 - b2) / (e1 - e2) * (I - P1 - P2) + (1.0 - heaviside(e1)) * P1 + (1.0 - heaviside(e2)) * P2;
    } else {
        out.D_t = heaviside(e1) * I;
        out.D_c = (1.0 - heaviside(e1)) * I;
    }
    const Vec3K ett = a1 * M1 + a2 * M2;
    const Vec3K etc = b1 * M1 + b2 * M2;
    out.eps_t = half_inv * ett;
    out.eps_c = half_inv * etc;
    out.sigma_t = half * ett;
    out.sigma_c = half * etc;
    out.C_t = half * out.D_t * half;
    out.C_c = half * out.D_c * half;
    out.psi_t = 0.5 * ett.squaredNorm();
    out.psi_c = 0.5 * etc.squaredNorm();
    return out;
}

}  // namespace pfaniso
