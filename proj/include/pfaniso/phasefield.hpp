#pragma once

// Phase-field regularization: crack geometric functions, degradation and the
// alternate-minimization settings.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pfaniso {

enum class PFVariant { AT1, AT2 };

inline std::string_view to_string(PFVariant v) { return v == PFVariant::AT1 ? "AT1" : "AT2"; }

inline PFVariant parse_pf_variant(std::string_view s) {
    if (s == "AT1" || s == "at1") return PFVariant::AT1;
    if (s == "AT2" || s == "at2") return PFVariant::AT2;
    throw std::invalid_argument("unknown phase-field variant '" + std::string(s) + "' (expected AT1 or AT2)");
}

/// Regularized fracture energy and degradation g(d) = (1-d)^2.
struct PFModel {
    PFVariant variant = PFVariant::AT2;
    double ell = 3.2e-5;       ///< regularization length [m]
    double Gc = 2700.0;        ///< fracture toughness [N/m]
    double residual = 1e-8;    ///< residual stiffness k added to g(d) in the elastic problem

    PFModel() = default;
    PFModel(PFVariant v, double ell_, double Gc_, double k = 1e-8) : variant(v), ell(ell_), Gc(Gc_), residual(k) {
        validate();
    }

    void validate() const {
        if (!(ell > 0.0)) throw std::invalid_argument("phase field: length scale must be positive");
        if (!(Gc > 0.0)) throw std::invalid_argument("phase field: Gc must be positive");
        if (!(residual >= 0.0 && residual < 1.0)) throw std::invalid_argument("phase field: residual stiffness must be in [0, 1)");
    }

    double w(double d) const { return variant == PFVariant::AT2 ? d * d : d; }
    double dw(double d) const { return variant == PFVariant::AT2 ? 2.0 * d : 1.0; }
    double d2w(double) const { return variant == PFVariant::AT2 ? 2.0 : 0.0; }
    /// c_w = integral over [0,1] of sqrt(w).
    double c_w() const { return variant == PFVariant::AT2 ? 0.5 : 2.0 / 3.0; }

    static double g(double d) { return (1.0 - d) * (1.0 - d); }
    static double dg(double d) { return -2.0 * (1.0 - d); }
    static double d2g(double) { return 2.0; }
};

inline void require_unit_interval(double d) {
    if (!(d >= 0.0 && d <= 1.0)) throw std::out_of_range("damage must lie in [0, 1], got " + std::to_string(d));
}

/// Crack surface density (1/(4 c_w)) (w(d)/ell + ell |grad d|^2).
inline double crack_density(double d, const Eigen::Vector2d& grad_d, const PFModel& pf) {
    require_unit_interval(d);
    return (pf.w(d) / pf.ell + pf.ell * grad_d.squaredNorm()) / (4.0 * pf.c_w());
}

/// Homogeneous AT2 damage for a uniform driving energy psi:
/// stationarity of g(d) psi + Gc d^2 / (2 ell).
inline double homogeneous_at2_damage(double psi, double Gc, double ell) {
    return 2.0 * psi / (2.0 * psi + Gc / ell);
}

enum class Irreversibility { node_clamp };

struct StaggeredConfig {
    int max_iters = 200;
    double tol_d = 1e-4;    ///< infinity norm of the damage increment
    double tol_u = 1e-8;    ///< relative residual of the displacement problem
    int max_newton = 50;
    Irreversibility irreversibility = Irreversibility::node_clamp;

    void validate() const {
        if (max_iters < 1 || max_newton < 1) throw std::invalid_argument("solver: iteration limits must be positive");
        if (!(tol_d > 0.0) || !(tol_u > 0.0)) throw std::invalid_argument("solver: tolerances must be positive");
    }
};

}  // namespace pfaniso
