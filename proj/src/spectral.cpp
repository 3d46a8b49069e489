#include "cevlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "cevlab/error.hpp"
#include "cevlab/quadrature.hpp"

namespace cevlab::spectral {

namespace {

constexpr double kClosedFormTol = 1e-9;
constexpr double kQuadratureTol = 1e-6;
constexpr double kAtomEdge = 1e-12;
constexpr std::size_t kInverseCells = 4096;

double parse_double(const std::string& text, std::string_view spec) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw SpecError("bad number '" + text + "' in spectral spec '" + std::string(spec) + "'");
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream stream(text);
  for (std::string part; std::getline(stream, part, sep);) parts.push_back(part);
  return parts;
}

}  // namespace

std::string to_string(Representation r) {
  switch (r) {
    case Representation::Density: return "density";
    case Representation::Atoms: return "atoms";
    case Representation::Table: return "table";
  }
  return "?";
}

SpectralMeasure SpectralMeasure::density(std::string family, std::vector<double> params, ScalarFn s,
                                         DensityForms forms) {
  if (!s) throw DomainError("SpectralMeasure::density: missing density");
  SpectralMeasure m;
  m.rep_ = Representation::Density;
  m.family_ = std::move(family);
  m.params_ = std::move(params);
  m.s_ = std::move(s);
  m.forms_ = std::move(forms);
  for (int i = 0; i < 64; ++i) {
    const double w = (i + 0.5) / 64.0;
    if (!(m.s_(w) >= 0.0)) throw DomainError("SpectralMeasure::density: density must be nonnegative");
  }
  return m;
}

SpectralMeasure SpectralMeasure::atoms(std::vector<Atom> atoms) {
  if (atoms.empty()) throw DomainError("SpectralMeasure::atoms: no atoms");
  for (const auto& a : atoms) {
    if (!(a.w >= 0.0 && a.w < 1.0)) throw DomainError("SpectralMeasure::atoms: atom outside [0,1)");
    if (!(a.mass > 0.0) || !std::isfinite(a.mass)) {
      throw DomainError("SpectralMeasure::atoms: atom masses must be positive and finite");
    }
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) { return l.w < r.w; });
  SpectralMeasure m;
  m.rep_ = Representation::Atoms;
  m.family_ = "atoms";
  m.atoms_ = std::move(atoms);
  return m;
}

SpectralMeasure SpectralMeasure::table(std::vector<double> nodes, std::vector<double> weights) {
  if (nodes.size() != weights.size()) throw DomainError("SpectralMeasure::table: size mismatch");
  std::vector<Atom> list;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (weights[i] > 0.0) list.push_back({nodes[i], weights[i]});
  }
  SpectralMeasure m = atoms(std::move(list));
  m.rep_ = Representation::Table;
  m.family_ = "table";
  return m;
}

SpectralMeasure SpectralMeasure::tabulate(const SpectralMeasure& d, std::size_t n) {
  if (d.representation() != Representation::Density) {
    throw DomainError("SpectralMeasure::tabulate: needs a density");
  }
  if (n == 0) throw DomainError("SpectralMeasure::tabulate: n must be positive");
  std::vector<double> nodes;
  std::vector<double> weights;
  double mass_prev = 0.0;
  double m1_prev = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double hi = static_cast<double>(i) / static_cast<double>(n);
    const double lo = static_cast<double>(i - 1) / static_cast<double>(n);
    double mass;
    double m1;
    if (i == n) {
      mass = d.total_mass() - mass_prev;
      m1 = (d.total_mass() - d.first_moment_complement()) - m1_prev;
    } else {
      mass = d.mass_below(hi) - mass_prev;
      m1 = d.moment1(hi) - m1_prev;
    }
    if (!std::isfinite(mass)) throw DomainError("SpectralMeasure::tabulate: needs finite mass");
    mass_prev += mass;
    m1_prev += m1;
    if (mass > 0.0) {
      nodes.push_back(std::clamp(m1 / mass, lo, std::nextafter(hi, 0.0)));
      weights.push_back(mass);
    }
  }
  auto t = table(std::move(nodes), std::move(weights));
  t.params_ = {static_cast<double>(n)};
  return t;
}

double SpectralMeasure::total_mass() const {
  if (rep_ != Representation::Density) {
    double sum = 0.0;
    for (const auto& a : atoms_) sum += a.mass;
    return sum;
  }
  if (forms_.total_mass) return scale_ * *forms_.total_mass;
  try {
    return scale_ * quad::integrate_singular(s_, 0.0, 1.0);
  } catch (const NumericalError&) {
    return kInf;
  }
}

double SpectralMeasure::first_moment_complement() const { return moment0(1.0); }

double SpectralMeasure::normalization_tolerance() const {
  const bool closed = rep_ == Representation::Atoms ||
                      (rep_ == Representation::Density && static_cast<bool>(forms_.moment0));
  return closed ? kClosedFormTol : kQuadratureTol;
}

double SpectralMeasure::density_at(double w) const {
  if (rep_ != Representation::Density) throw DomainError("SpectralMeasure: no density for atoms");
  return scale_ * s_(w);
}

double SpectralMeasure::mass_below(double a) const {
  if (rep_ != Representation::Density) {
    double sum = 0.0;
    for (const auto& at : atoms_) {
      if (at.w < a) sum += at.mass;
    }
    return sum;
  }
  if (a <= 0.0) return 0.0;
  if (a >= 1.0) return total_mass();
  if (forms_.mass_upto) return scale_ * forms_.mass_upto(a);
  return scale_ * quad::integrate_singular(s_, 0.0, a);
}

double SpectralMeasure::moment0(double a) const {
  if (rep_ != Representation::Density) {
    double sum = 0.0;
    for (const auto& at : atoms_) {
      if (at.w <= a + kAtomEdge) sum += (1.0 - at.w) * at.mass;
    }
    return sum;
  }
  if (a <= 0.0) return 0.0;
  a = std::min(a, 1.0);
  if (forms_.moment0) return scale_ * forms_.moment0(a);
  const auto& s = s_;
  return scale_ * quad::integrate_singular([&s](double w) { return (1.0 - w) * s(w); }, 0.0, a);
}

double SpectralMeasure::moment1(double a) const {
  if (rep_ != Representation::Density) {
    double sum = 0.0;
    for (const auto& at : atoms_) {
      if (at.w <= a + kAtomEdge) sum += at.w * at.mass;
    }
    return sum;
  }
  if (a <= 0.0) return 0.0;
  if (a < 1.0 && !forms_.moment0) {
    const auto& s = s_;
    return scale_ * quad::integrate_singular([&s](double w) { return w * s(w); }, 0.0, a);
  }
  return mass_below(a) - moment0(a);
}

SpectralMeasure SpectralMeasure::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("SpectralMeasure::scaled: factor must be positive");
  SpectralMeasure m = *this;
  m.scale_ *= c;
  for (auto& a : m.atoms_) a.mass *= c;
  return m;
}

nlohmann::json SpectralMeasure::to_json() const {
  nlohmann::json j;
  j["kind"] = to_string(rep_);
  if (rep_ == Representation::Density) {
    j["family"] = family_;
    j["params"] = params_;
    j["scale"] = scale_;
  } else if (rep_ == Representation::Atoms) {
    auto list = nlohmann::json::array();
    for (const auto& a : atoms_) list.push_back({a.w, a.mass});
    j["atoms"] = list;
  } else {
    std::vector<double> nodes;
    std::vector<double> weights;
    for (const auto& a : atoms_) {
      nodes.push_back(a.w);
      weights.push_back(a.mass);
    }
    j["nodes"] = nodes;
    j["weights"] = weights;
  }
  return j;
}

SpectralMeasure SpectralMeasure::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "atoms") {
    std::vector<Atom> list;
    for (const auto& a : j.at("atoms")) list.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    return atoms(std::move(list));
  }
  if (kind == "table") {
    return table(j.at("nodes").get<std::vector<double>>(), j.at("weights").get<std::vector<double>>());
  }
  if (kind == "density") {
    const auto family = j.at("family").get<std::string>();
    const auto p = j.value("params", std::vector<double>{});
    const double scale = j.value("scale", 1.0);
    auto need = [&](std::size_t k) {
      if (p.size() != k) throw SpecError("spectral density '" + family + "': wrong parameter count");
    };
    SpectralMeasure base = [&] {
      if (family == "uniform") {
        need(1);
        return uniform(p[0]);
      }
      if (family == "pole") {
        need(1);
        return pole(p[0]);
      }
      if (family == "beta") {
        need(2);
        return beta(p[0], p[1]);
      }
      throw SpecError("unknown spectral density family '" + family + "'");
    }();
    return base.scaled(scale);
  }
  throw SpecError("unknown spectral kind '" + kind + "'");
}

SpectralMeasure uniform(double level) {
  if (!(level > 0.0)) throw DomainError("uniform: level must be positive");
  DensityForms f;
  f.mass_upto = [level](double a) { return level * a; };
  f.moment0 = [level](double a) { return level * (a - 0.5 * a * a); };
  f.quantile = [](double u) { return u; };
  f.total_mass = level;
  return SpectralMeasure::density("uniform", {level}, [level](double) { return level; }, std::move(f));
}

SpectralMeasure pole(double gamma) {
  if (!(gamma > 1.0 && gamma < 2.0)) throw DomainError("pole: gamma must lie in (1, 2)");
  const double c = 2.0 - gamma;
  DensityForms f;
  f.mass_upto = [c, gamma](double a) { return c * (std::pow(1.0 - a, 1.0 - gamma) - 1.0) / (gamma - 1.0); };
  f.moment0 = [c](double a) { return c * (1.0 - std::pow(1.0 - a, c)) / c; };
  f.total_mass = kInf;
  return SpectralMeasure::density("pole", {gamma}, [c, gamma](double w) { return c * std::pow(1.0 - w, -gamma); },
                                  std::move(f));
}

SpectralMeasure beta(double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("beta: shape parameters must be positive");
  // Normalizing so that int (1-w) s = B(a, b+1) / B(a, b+1) = 1.
  const double norm = boost::math::beta(a, b + 1.0);
  const double full = boost::math::beta(a, b);
  DensityForms f;
  f.mass_upto = [a, b, norm, full](double x) { return full * boost::math::ibeta(a, b, x) / norm; };
  f.moment0 = [a, b](double x) { return boost::math::ibeta(a, b + 1.0, x); };
  f.quantile = [a, b](double u) { return boost::math::ibeta_inv(a, b, u); };
  f.total_mass = full / norm;
  auto s = [a, b, norm](double w) { return std::pow(w, a - 1.0) * std::pow(1.0 - w, b - 1.0) / norm; };
  return SpectralMeasure::density("beta", {a, b}, std::move(s), std::move(f));
}

std::vector<std::string> spectral_names() { return {"atoms", "beta", "pole", "table", "uniform"}; }

SpectralMeasure parse_spectral(std::string_view spec) {
  const std::string text(spec);
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);

  if (head == "uniform" && rest.empty()) return validate_normalization(uniform());
  if (head == "pole") return pole(parse_double(rest, spec));
  if (head == "beta") {
    const auto parts = split(rest, ',');
    if (parts.size() != 2) throw SpecError("beta needs two parameters: beta:a,b");
    return beta(parse_double(parts[0], spec), parse_double(parts[1], spec));
  }
  if (head == "atoms") {
    std::vector<Atom> list;
    for (const auto& item : split(rest, ',')) {
      const auto wm = split(item, ':');
      if (wm.size() != 2) throw SpecError("atoms entries are w:mass, got '" + item + "'");
      list.push_back({parse_double(wm[0], spec), parse_double(wm[1], spec)});
    }
    return validate_normalization(SpectralMeasure::atoms(std::move(list)));
  }
  if (head == "table") {
    const auto next = rest.find(':');
    if (next == std::string::npos) throw SpecError("table spec is table:<cells>:<density>");
    const double cells = parse_double(rest.substr(0, next), spec);
    if (!(cells >= 1.0)) throw SpecError("table needs at least one cell");
    auto inner = parse_spectral(rest.substr(next + 1));
    return validate_normalization(SpectralMeasure::tabulate(inner, static_cast<std::size_t>(cells)));
  }
  std::string known;
  for (const auto& n : spectral_names()) known += (known.empty() ? "" : ", ") + n;
  throw SpecError("unknown spectral measure '" + text + "'; known: " + known);
}

SpectralMeasure validate_normalization(const SpectralMeasure& s) {
  const double integral = s.first_moment_complement();
  if (!(integral > 0.0) || !std::isfinite(integral)) {
    throw DomainError("validate_normalization: int (1-w) S(dw) must be positive and finite");
  }
  return s.scaled(1.0 / integral);
}

MuStar::MuStar(SpectralMeasure s) : s_(std::move(s)) {
  const double integral = s_.first_moment_complement();
  if (!(std::abs(integral - 1.0) <= s_.normalization_tolerance())) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "MuStar: spectral measure is not normalized (int (1-w) S(dw) = " << integral
        << "); pass it through validate_normalization";
    throw DomainError(msg.str());
  }
}

double MuStar::rect(double x, double y) const {
  if (!(x > 0.0) || !(y > 0.0)) throw DomainError("mu_rect: x and y must be positive");
  if (s_.representation() != Representation::Density) {
    double sum = 0.0;
    for (const auto& a : s_.atom_list()) sum += a.mass * std::max(0.0, (1.0 - a.w) / y - a.w / x);
    return sum;
  }
  const double a = x / (x + y);
  return std::max(0.0, s_.moment0(a) / y - s_.moment1(a) / x);
}

double MuStar::rect_fubini(double x, double y) const {
  if (!(x > 0.0) || !(y > 0.0)) throw DomainError("mu_rect_fubini: x and y must be positive");
  std::vector<double> cuts{1.0 / (x + y)};
  for (const auto& a : s_.atom_list()) {
    cuts.push_back(a.w / x);
    cuts.push_back((1.0 - a.w) / y);
  }
  const auto& s = s_;
  auto integrand = [&s, x, y](double v) { return s.mass_below(std::min(x * v, 1.0 - y * v)); };
  // Densities may behave like a power of v at either end of a piece.
  const auto rule = s_.representation() == Representation::Density ? quad::Rule::TanhSinh
                                                                     : quad::Rule::GaussKronrod;
  return quad::integrate_split(integrand, 0.0, 1.0 / y, cuts, quad::kAbsTol, rule);
}

double MuStar::h_star(double x) const { return rect(x, 1.0); }

double MuStar::g_random_norm(double x) const {
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return s_.moment0(1.0);
  return s_.moment0(x / (1.0 + x));
}

namespace {

/// W ~ S / |S| as a function of one uniform variate.
std::function<double(double)> w_sampler(const SpectralMeasure& s, double mass) {
  if (s.representation() != Representation::Density) {
    std::vector<double> cum;
    std::vector<double> ws;
    double run = 0.0;
    for (const auto& a : s.atom_list()) {
      run += a.mass;
      cum.push_back(run / mass);
      ws.push_back(a.w);
    }
    cum.back() = 1.0;
    return [cum, ws](double u) {
      const auto it = std::lower_bound(cum.begin(), cum.end(), u);
      return ws[static_cast<std::size_t>(it - cum.begin())];
    };
  }
  if (s.has_quantile()) return [&s](double u) { return s.quantile(u); };
  // Piecewise-linear inverse of the tabulated CDF.
  std::vector<double> cdf(kInverseCells + 1, 0.0);
  for (std::size_t i = 1; i <= kInverseCells; ++i) {
    cdf[i] = s.mass_below(static_cast<double>(i) / kInverseCells) / mass;
  }
  cdf.back() = 1.0;
  return [cdf](double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - cdf.begin()));
    const double lo = cdf[i - 1];
    const double hi = cdf[std::min(i, kInverseCells)];
    const double frac = hi > lo ? (u - lo) / (hi - lo) : 0.5;
    return std::min((static_cast<double>(i - 1) + frac) / kInverseCells, std::nextafter(1.0, 0.0));
  };
}

template <class Keep>
std::vector<std::array<double, 2>> polar_draws(const MuStar& m, std::size_t n, std::uint64_t seed, Exec exec,
                                               int workers, Keep keep) {
  const SpectralMeasure& s = m.s();
  const double mass = s.total_mass();
  if (!std::isfinite(mass)) throw DomainError("polar sampling: S has infinite total mass");
  const auto draw_w = w_sampler(s, mass);

  std::vector<std::vector<std::array<double, 2>>> parts(chunk_count(n));
  for_each_chunk(n, exec, workers, [&](std::uint64_t chunk, std::size_t begin, std::size_t end) {
    Stream stream(seed, chunk);
    auto& out = parts[chunk];
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      const double w = draw_w(stream.uniform());
      const double r = stream.pareto();
      const std::array<double, 2> pt{r * w, r * (1.0 - w)};
      if (keep(pt)) out.push_back(pt);
    }
  });
  std::vector<std::array<double, 2>> points;
  for (auto& p : parts) points.insert(points.end(), p.begin(), p.end());
  return points;
}

}  // namespace

std::vector<std::array<double, 2>> sample_polar(const MuStar& m, std::size_t n, std::uint64_t seed, Exec exec,
                                                int workers) {
  return polar_draws(m, n, seed, exec, workers, [](const std::array<double, 2>&) { return true; });
}

MuStarSample sample_from_mu_star(const MuStar& m, std::size_t n, std::uint64_t seed, Exec exec, int workers) {
  const SpectralMeasure& s = m.s();
  const double mass = s.total_mass();
  if (!std::isfinite(mass)) throw DomainError("sample_from_mu_star: S has infinite total mass");
  const double rate = s.first_moment_complement() / mass;
  if (rate < 1e-4) throw DomainError("sample_from_mu_star: acceptance rate below 1e-4");

  MuStarSample sample;
  sample.n_raw = n;
  sample.points =
      polar_draws(m, n, seed, exec, workers, [](const std::array<double, 2>& pt) { return pt[1] > 1.0; });
  return sample;
}

}  // namespace cevlab::spectral
