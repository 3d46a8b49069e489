#include "cevlab/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cevlab/error.hpp"
#include "cevlab/montecarlo.hpp"
#include "cevlab/parallel.hpp"
#include "cevlab/rv_toolkit.hpp"
#include "cevlab/spectral.hpp"
#include "cevlab/transforms.hpp"
#include "cevlab/zoo.hpp"

namespace cevlab::cli {

namespace {

using nlohmann::json;

const std::vector<std::string> kVerbs{"coord-change", "list", "random-norming", "spectral", "standardize", "verify"};
const std::vector<std::string> kSpectralOps{"fubini", "g", "hstar", "measure", "rect"};
const std::vector<std::string> kRegistries{"functions", "models", "spectral"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string joined(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::string shortest(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::string render(const json& j) { return j.dump(2) + "\n"; }

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot write '" + path.string() + "'");
  f << text;
}

/// Writes the document to config.out, or to `out` when no path is set.
void emit(const ExperimentConfig& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
  } else {
    write_file(c.out, text);
  }
}

std::vector<double> xs_or(const std::vector<double>& xs, std::vector<double> fallback) {
  return xs.empty() ? fallback : xs;
}

int run_verify(const ExperimentConfig& c, std::ostream& out) {
  const zoo::ConditionalModel model = zoo::parse_model(c.model_spec());
  mc::StudyOptions options;
  options.workers = c.workers;
  const mc::VerificationReport report = mc::convergence_study(model, c.probs, c.n, c.seed, options);
  if (c.out.empty()) {
    out << (c.format == "csv" ? report.to_csv() : render(report.to_json()));
  } else {
    std::filesystem::path path(c.out);
    write_file(path, c.format == "csv" ? report.to_csv() : render(report.to_json()));
    path.replace_extension(c.format == "csv" ? ".json" : ".csv");
    write_file(path, c.format == "csv" ? render(report.to_json()) : report.to_csv());
  }
  return report.passed ? kOk : kVerificationFailed;
}

int run_spectral(const ExperimentConfig& c, std::ostream& out) {
  const spectral::SpectralMeasure s = spectral::parse_spectral(c.s);
  if (c.op == "measure") {
    json j = s.to_json();
    j["schema"] = mc::kSchemaVersion;
    emit(c, c.format == "csv" ? j.dump() + "\n" : render(j), out);
    return kOk;
  }
  const spectral::MuStar m(s);
  const bool two_d = c.op == "rect" || c.op == "fubini";
  const std::vector<double> xs = xs_or(c.x, {1.0});
  std::vector<double> ys = two_d ? xs_or(c.y, {1.0}) : std::vector<double>{};
  if (two_d && ys.size() == 1 && xs.size() > 1) ys.assign(xs.size(), ys.front());
  if (two_d && ys.size() != xs.size()) throw DomainError("--x and --y must have the same length");

  std::vector<double> values;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (c.op == "hstar") values.push_back(m.h_star(xs[i]));
    if (c.op == "g") values.push_back(m.g_random_norm(xs[i]));
    if (c.op == "rect") values.push_back(m.rect(xs[i], ys[i]));
    if (c.op == "fubini") values.push_back(m.rect_fubini(xs[i], ys[i]));
  }
  if (c.format == "csv") {
    std::ostringstream csv;
    csv << (two_d ? "x,y,value\n" : "x,value\n");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      csv << shortest(xs[i]) << ',';
      if (two_d) csv << shortest(ys[i]) << ',';
      csv << shortest(values[i]) << '\n';
    }
    emit(c, csv.str(), out);
  } else {
    json j{{"schema", mc::kSchemaVersion}, {"s", c.s}, {"op", c.op}, {"x", xs}, {"values", values}};
    if (two_d) j["y"] = ys;
    emit(c, render(j), out);
  }
  return kOk;
}

int run_coord_change(const ExperimentConfig& c, std::ostream& out) {
  if (c.h.empty()) throw DomainError("coord-change needs --h");
  const zoo::ConditionalModel model = zoo::parse_model(c.model_spec());
  const CoordinateChange cc = change_coordinates(parse_function(c.h), model.norming, model.limit_cdf);
  json j = cc.to_json(xs_or(c.x, {-0.5, 0.0, 0.5, 1.0, 2.0}));
  j["schema"] = mc::kSchemaVersion;
  j["model"] = model.name;
  emit(c, render(j), out);
  return kOk;
}

int run_standardize(const ExperimentConfig& c, std::ostream& out) {
  json j;
  if (!c.h.empty()) {
    const Standardizer st = standardize_y(parse_function(c.h), c.gamma.value_or(0.0));
    j = st.to_json();
  } else {
    const zoo::ConditionalModel model = zoo::parse_model(c.model_spec());
    j["model"] = model.name;
    j["y"] = model.y_standardizer.to_json();
    try {
      j["x"] = standardize_x(model.norming).to_json();
    } catch (const DomainError& e) {
      j["x"] = json{{"standardizable", false}, {"reason", e.what()}};
    }
  }
  j["schema"] = mc::kSchemaVersion;
  emit(c, render(j), out);
  return kOk;
}

int run_random_norming(const ExperimentConfig& c, std::ostream& out) {
  mc::RandomNormingReport report;
  if (!c.model.empty()) {
    report = mc::random_norming_check(zoo::parse_model(c.model_spec()), c.probs.back(), c.n, c.seed,
                                      Exec::Parallel, c.workers);
  } else {
    report = mc::random_norming_check(spectral::MuStar(spectral::parse_spectral(c.s)), c.n, c.seed,
                                      Exec::Parallel, c.workers);
  }
  json j = report.to_json();
  j["seed"] = c.seed;
  j["n"] = c.n;
  emit(c, render(j), out);
  return kOk;
}

void append_param(std::string& spec, const std::string& key, const std::optional<double>& v) {
  if (!v) return;
  spec += (spec.find(':') == std::string::npos ? ":" : ",") + key + "=" + shortest(*v);
}

}  // namespace

std::string ExperimentConfig::model_spec() const {
  std::string spec = model;
  append_param(spec, "p", p);
  append_param(spec, "theta", theta);
  return spec;
}

void ExperimentConfig::validate() const {
  if (!contains(kVerbs, verb)) throw DomainError("unknown verb '" + verb + "'; expected one of: " + joined(kVerbs));
  if (format != "json" && format != "csv") throw DomainError("--format must be json or csv");
  if (workers < 0) throw DomainError("--workers must be nonnegative");
  if (verb == "list" && !contains(kRegistries, registry)) {
    throw DomainError("list expects one of: " + joined(kRegistries));
  }
  if (verb == "spectral" && !contains(kSpectralOps, op)) {
    throw DomainError("unknown --op '" + op + "'; expected one of: " + joined(kSpectralOps));
  }
  const bool needs_model = verb == "verify" || verb == "coord-change" || (verb == "standardize" && h.empty());
  if (needs_model && model.empty()) throw DomainError(verb + " needs --model; see 'cevlab list models'");
  if (verb == "verify" || verb == "random-norming") {
    if (n < 1000) throw DomainError("--n must be at least 1000");
    if (probs.empty()) throw DomainError("--probs must not be empty");
    const double lo = 20.0 / static_cast<double>(n);
    for (double q : probs) {
      if (!(q > lo && q < 1.0)) {
        throw DomainError("exceedance probability " + shortest(q) + " outside (20/n, 1) = (" + shortest(lo) + ", 1)");
      }
    }
  }
}

void ExperimentConfig::merge_json(const json& j) {
  if (!j.is_object()) throw DomainError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "verb") verb = v.get<std::string>();
    else if (key == "model") model = v.get<std::string>();
    else if (key == "s") s = v.get<std::string>();
    else if (key == "op") op = v.get<std::string>();
    else if (key == "h") h = v.get<std::string>();
    else if (key == "registry") registry = v.get<std::string>();
    else if (key == "n") n = v.get<std::size_t>();
    else if (key == "seed") seed = v.get<std::uint64_t>();
    else if (key == "probs") probs = v.get<std::vector<double>>();
    else if (key == "x") x = v.get<std::vector<double>>();
    else if (key == "y") y = v.get<std::vector<double>>();
    else if (key == "theta") theta = v.get<double>();
    else if (key == "p") p = v.get<double>();
    else if (key == "gamma") gamma = v.get<double>();
    else if (key == "out") out = v.get<std::string>();
    else if (key == "workers") workers = v.get<int>();
    else if (key == "format") format = v.get<std::string>();
    else throw DomainError("unknown config key '" + key + "'");
  }
}

json ExperimentConfig::to_json() const {
  json j{{"verb", verb}, {"model", model}, {"s", s},     {"op", op},       {"h", h},
         {"registry", registry}, {"n", n}, {"seed", seed}, {"probs", probs}, {"x", x},
         {"y", y}, {"out", out}, {"workers", workers}, {"format", format}};
  if (theta) j["theta"] = *theta;
  if (p) j["p"] = *p;
  if (gamma) j["gamma"] = *gamma;
  return j;
}

std::string list(const std::string& registry) {
  std::vector<std::string> names;
  if (registry == "models") names = zoo::model_names();
  else if (registry == "functions") names = function_names();
  else if (registry == "spectral") names = spectral::spectral_names();
  else throw DomainError("list expects one of: " + joined(kRegistries));
  std::sort(names.begin(), names.end());
  std::string out;
  for (const auto& name : names) out += name + "\n";
  return out;
}

int run(const ExperimentConfig& config, std::ostream& out, std::ostream& meta) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  int code = kOk;
  if (config.verb == "list") {
    emit(config, list(config.registry), out);
  } else if (config.verb == "verify") {
    code = run_verify(config, out);
  } else if (config.verb == "spectral") {
    code = run_spectral(config, out);
  } else if (config.verb == "coord-change") {
    code = run_coord_change(config, out);
  } else if (config.verb == "standardize") {
    code = run_standardize(config, out);
  } else {
    code = run_random_norming(config, out);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  meta << json{{"verb", config.verb}, {"seconds", seconds}, {"workers", resolve_workers(config.workers)},
               {"exit_code", code}}
              .dump()
       << "\n";
  return code;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"cevlab: conditional extreme value limits, checked numerically"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print help");
  app.set_help_all_flag("--help-all");

  std::string config_path;
  ExperimentConfig flags;
  std::string probs_text;
  std::string x_text;
  std::string y_text;
  double theta = 0.0;
  double p = 0.0;
  double gamma = 0.0;
  std::vector<CLI::Option*> given;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON file mirroring the flags");
    sub->add_option("--model", flags.model, "model spec, e.g. bvn:0.5 or mix1:p=0.5,theta=0.5");
    sub->add_option("--s", flags.s, "spectral measure spec, e.g. uniform or atoms:0.25:1,0.75:1");
    sub->add_option("--h", flags.h, "function spec, e.g. exp or compose:log,normal_binv");
    sub->add_option("--n", flags.n, "sample size");
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_option("--probs", probs_text, "comma-separated exceedance probabilities");
    sub->add_option("--x", x_text, "comma-separated x values");
    sub->add_option("--y", y_text, "comma-separated y values");
    sub->add_option("--theta", theta, "logistic dependence parameter folded into the model spec");
    sub->add_option("--p", p, "power parameter folded into the model spec");
    sub->add_option("--gamma", gamma, "extreme value index for standardize --h");
    sub->add_option("--op", flags.op, "spectral operation: hstar, rect, fubini, g, measure");
    sub->add_option("--out", flags.out, "output path (stdout when absent)");
    sub->add_option("--workers", flags.workers, "worker threads; 0 = available parallelism");
    sub->add_option("--format", flags.format, "json or csv");
  };

  std::vector<CLI::App*> subs;
  for (const auto& verb : kVerbs) {
    CLI::App* sub = app.add_subcommand(verb);
    add_common(sub);
    if (verb == "list") sub->add_option("registry", flags.registry, "models, functions or spectral")->required();
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\nverbs: " << joined(kVerbs) << "\n";
    return kUsageError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  auto given_flag = [&](const std::string& name) { return chosen->get_option(name)->count() > 0; };

  auto parse_list = [](const std::string& text, const std::string& flag) {
    std::vector<double> values;
    std::stringstream stream(text);
    for (std::string part; std::getline(stream, part, ',');) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(part, &used));
        if (used != part.size()) throw std::invalid_argument(part);
      } catch (const std::exception&) {
        throw DomainError("--" + flag + ": '" + part + "' is not a number");
      }
    }
    return values;
  };

  try {
    ExperimentConfig c;
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw DomainError("cannot read config '" + config_path + "'");
      c.merge_json(json::parse(f));
    }
    c.verb = chosen->get_name();
    for (const char* name : {"--model", "--s", "--h", "--n", "--seed", "--op", "--out", "--workers", "--format"}) {
      if (!given_flag(name)) continue;
      const std::string key = std::string(name).substr(2);
      if (key == "model") c.model = flags.model;
      if (key == "s") c.s = flags.s;
      if (key == "h") c.h = flags.h;
      if (key == "n") c.n = flags.n;
      if (key == "seed") c.seed = flags.seed;
      if (key == "op") c.op = flags.op;
      if (key == "out") c.out = flags.out;
      if (key == "workers") c.workers = flags.workers;
      if (key == "format") c.format = flags.format;
    }
    if (given_flag("--probs")) c.probs = parse_list(probs_text, "probs");
    if (given_flag("--x")) c.x = parse_list(x_text, "x");
    if (given_flag("--y")) c.y = parse_list(y_text, "y");
    if (given_flag("--theta")) c.theta = theta;
    if (given_flag("--p")) c.p = p;
    if (given_flag("--gamma")) c.gamma = gamma;
    if (c.verb == "list") c.registry = flags.registry;

    std::ostringstream meta;
    const int code = run(c, out, meta);
    if (!c.out.empty()) write_file(c.out + ".meta.json", meta.str());
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const json::exception& e) {
    err << "error: bad config: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
}

}  // namespace cevlab::cli
