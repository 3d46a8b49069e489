#pragma once

// Spectral measures S on [0,1) and the standardized limit measure mu* they generate.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cevlab/function_handle.hpp"
#include "cevlab/parallel.hpp"
#include "json.hpp"

namespace cevlab::spectral {

enum class Representation { Density, Atoms, Table };

std::string to_string(Representation r);

struct Atom {
  double w;
  double mass;
};

/// Closed forms a density family may supply. Any missing piece falls back to quadrature.
struct DensityForms {
  ScalarFn mass_upto;    ///< a -> int_0^a s(w) dw
  ScalarFn moment0;      ///< a -> int_0^a (1-w) s(w) dw
  ScalarFn quantile;     ///< inverse of the normalized mass_upto, for sampling
  std::optional<double> total_mass;
};

/// A measure on [0,1) given by a density, a finite list of atoms, or a quadrature table.
///
/// Table measures are atoms at quadrature nodes; they differ from Atoms only in the
/// normalization tolerance they are held to (1e-6 rather than 1e-9).
class SpectralMeasure {
 public:
  static SpectralMeasure density(std::string family, std::vector<double> params, ScalarFn s,
                                 DensityForms forms = {});
  static SpectralMeasure atoms(std::vector<Atom> atoms);
  static SpectralMeasure table(std::vector<double> nodes, std::vector<double> weights);

  /// n-cell discretization of a density: each cell's mass sits at the cell's centroid,
  /// which keeps int (1-w) S(dw) unchanged. Cells are uniform in w.
  static SpectralMeasure tabulate(const SpectralMeasure& density, std::size_t n);

  Representation representation() const { return rep_; }
  const std::string& family() const { return family_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<Atom>& atom_list() const { return atoms_; }

  /// Multiplier applied by scaled(); 1 for a measure built directly.
  double scale_factor() const { return scale_; }
  /// S([0,1)); +inf for densities that are not integrable at 1.
  double total_mass() const;
  /// int (1-w) S(dw) over [0,1).
  double first_moment_complement() const;
  /// Tolerance that first_moment_complement must meet to count as normalized.
  double normalization_tolerance() const;

  double density_at(double w) const;
  /// S([0,a)), strict at a for atoms.
  double mass_below(double a) const;
  /// int_{[0,a]} (1-w) S(dw).
  double moment0(double a) const;
  /// int_{[0,a]} w S(dw).
  double moment1(double a) const;

  /// Closed-form quantile of S / |S| when the density family provides one.
  bool has_quantile() const { return static_cast<bool>(forms_.quantile); }
  double quantile(double u) const { return forms_.quantile(u); }

  SpectralMeasure scaled(double c) const;

  nlohmann::json to_json() const;
  static SpectralMeasure from_json(const nlohmann::json& j);

 private:
  SpectralMeasure() = default;

  Representation rep_ = Representation::Atoms;
  std::string family_;
  std::vector<double> params_;
  double scale_ = 1.0;
  // Density: unscaled density and forms; scale_ multiplies them.
  ScalarFn s_;
  DensityForms forms_;
  // Atoms and tables (masses already scaled).
  std::vector<Atom> atoms_;
};

// Density families. Each is returned unnormalized where that is the natural form.

/// s(w) = level on [0,1).
SpectralMeasure uniform(double level = 1.0);
/// s(w) = (2-gamma) (1-w)^{-gamma}, gamma in (1,2): normalized, infinite total mass.
SpectralMeasure pole(double gamma);
/// s(w) = w^{a-1} (1-w)^{b-1} / B(a, b+1): normalized, finite mass.
SpectralMeasure beta(double a, double b);

/// Parses "uniform", "pole:1.5", "beta:2,3", "atoms:0.25:1,0.75:1", "table:64:beta:2,3"
/// and returns the normalized measure. Throws SpecError on unknown input.
SpectralMeasure parse_spectral(std::string_view spec);
std::vector<std::string> spectral_names();

/// Rescales s so that int (1-w) S(dw) = 1; the factor is kept in scale_factor().
/// Throws DomainError when the integral is zero or not finite.
SpectralMeasure validate_normalization(const SpectralMeasure& s);

/// The standardized limit measure mu* with spectral measure S.
class MuStar {
 public:
  /// Throws DomainError unless S is normalized within its tolerance.
  explicit MuStar(SpectralMeasure s);

  const SpectralMeasure& s() const { return s_; }

  /// mu*([0,x] x (y,inf]) = y^{-1} int_0^a (1-w) S(dw) - x^{-1} int_0^a w S(dw), a = x/(x+y).
  double rect(double x, double y) const;
  /// Same rectangle through int_0^{1/y} S([0, xv ^ (1-yv))) dv.
  double rect_fubini(double x, double y) const;
  /// H*(x) = mu*([0,x] x (1,inf]).
  double h_star(double x) const;
  /// G(x) = int_0^{x/(1+x)} (1-w) S(dw), the limit law of X*/Y given Y > t.
  double g_random_norm(double x) const;

 private:
  SpectralMeasure s_;
};

struct MuStarSample {
  std::vector<std::array<double, 2>> points;  ///< accepted (x, y), y > 1
  std::size_t n_raw = 0;
  double acceptance_rate() const {
    return n_raw == 0 ? 0.0 : static_cast<double>(points.size()) / static_cast<double>(n_raw);
  }
};

/// n polar pairs (R W, R (1-W)) with W ~ S/|S| and R standard Pareto, all kept. Above
/// the unit square this is mu* scaled by 1/|S|. Throws DomainError for infinite-mass S.
std::vector<std::array<double, 2>> sample_polar(const MuStar& m, std::size_t n, std::uint64_t seed,
                                                Exec exec = Exec::Parallel, int workers = 0);

/// Draws n polar pairs (R W, R (1-W)) with W ~ S/|S| and R standard Pareto, keeping those
/// with second coordinate above 1. Throws DomainError for infinite-mass S or when the
/// acceptance rate 1/|S| falls below 1e-4. Output is independent of exec and workers.
MuStarSample sample_from_mu_star(const MuStar& m, std::size_t n, std::uint64_t seed,
                                 Exec exec = Exec::Parallel, int workers = 0);

}  // namespace cevlab::spectral
