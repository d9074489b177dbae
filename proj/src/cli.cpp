#include "kema/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "kema/align.hpp"
#include "kema/errors.hpp"
#include "kema/eval.hpp"
#include "kema/io.hpp"
#include "kema/stability.hpp"
#include "kema/toy_constants.hpp"
#include "kema/toydata.hpp"

namespace kema::cli {

namespace {

struct FitOptions {
  std::string method = "kema";
  std::string kernel = "rbf:auto";
  double mu = 1.0;
  int k = 21;
  int features = 0;
  double reg = kDefaultRegularization;
  double rank_frac = 0.1;
  std::string sigma_scope = "pooled";
  std::string weighting = "binary";
  double heat_sigma = 0.0;
  bool normalized = false;
};

void add_fit_options(CLI::App* app, FitOptions& o, bool with_method) {
  if (with_method) {
    app->add_option("--method", o.method, "ssma | kema | rekema")
        ->check(CLI::IsMember({"ssma", "kema", "rekema"}));
    app->add_option("--rank-frac", o.rank_frac, "representative fraction per domain (rekema)");
  }
  app->add_option("--kernel", o.kernel,
                  "kernel for every domain, or a comma list with one per domain "
                  "(linear, rbf:auto, rbf:S, hik, chi2:auto, chi2:S, precomputed:FILE)");
  app->add_option("--mu", o.mu, "weight of the same-class graph");
  app->add_option("--k", o.k, "neighbors in the topology graph");
  app->add_option("--features", o.features, "latent features to keep (0 = min(20, available))");
  app->add_option("--reg", o.reg, "relative regularization of the right-hand side");
  app->add_option("--sigma-scope", o.sigma_scope, "pooled | per-domain")
      ->check(CLI::IsMember({"pooled", "per-domain"}));
  app->add_option("--weighting", o.weighting, "binary | heat")
      ->check(CLI::IsMember({"binary", "heat"}));
  app->add_option("--heat-sigma", o.heat_sigma, "heat weight width (0 = mean k-th distance)");
  app->add_flag("--normalized-laplacian", o.normalized, "use I - D^-1/2 W D^-1/2");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

KernelSpec parse_kernel_arg(const std::string& text) {
  const std::string prefix = "precomputed:";
  if (text.rfind(prefix, 0) == 0) return KernelSpec::precomputed(read_matrix_csv(text.substr(prefix.size())));
  return parse_kernel(text);
}

std::vector<KernelSpec> kernels_for(const std::string& arg, std::size_t domains) {
  const auto parts = split_list(arg);
  std::vector<KernelSpec> out;
  if (parts.size() == 1) {
    const KernelSpec k = parse_kernel_arg(parts[0]);
    out.assign(domains, k);
  } else if (parts.size() == domains) {
    for (const auto& p : parts) out.push_back(parse_kernel_arg(p));
  } else {
    throw Error(ErrorCode::InvalidArgument, "--kernel lists " + std::to_string(parts.size()) +
                                                " kernels for " + std::to_string(domains) +
                                                " domains");
  }
  return out;
}

AlignmentProblem make_problem(const FitOptions& o, std::vector<DomainDataset> datasets) {
  AlignmentProblem p;
  p.kernels = kernels_for(o.kernel, datasets.size());
  p.datasets = std::move(datasets);
  p.graph.k = o.k;
  p.graph.weighting = o.weighting == "heat" ? EdgeWeighting::Heat : EdgeWeighting::Binary;
  p.graph.heat_sigma = o.heat_sigma;
  p.graph.normalized = o.normalized;
  p.mu = o.mu;
  p.num_features = o.features;
  p.reg = o.reg;
  p.sigma_scope = o.sigma_scope == "per-domain" ? SigmaScope::PerDomain : SigmaScope::Pooled;
  return p;
}

struct Fitted {
  AlignmentModel model;
  std::vector<std::vector<Index>> representatives;
};

Fitted fit_method(const FitOptions& o, const AlignmentProblem& p, std::uint64_t seed) {
  Fitted f;
  if (o.method == "ssma") {
    f.model = fit_ssma(p);
  } else if (o.method == "kema") {
    f.model = fit_kema(p);
  } else if (o.method == "rekema") {
    f.representatives = select_representatives(p.datasets, o.rank_frac, seed);
    f.model = fit_rekema(p, f.representatives);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown method '" + o.method + "'");
  }
  return f;
}

fs::path split_file(const fs::path& dir, int domain, const std::string& split) {
  return dir / ("domain" + std::to_string(domain) + "_" + split + ".csv");
}

std::vector<DomainDataset> load_split(const fs::path& dir, const std::string& split) {
  std::vector<DomainDataset> out;
  for (int d = 1;; ++d) {
    const fs::path f = split_file(dir, d, split);
    if (!fs::exists(f)) break;
    out.push_back(read_dataset_csv(f, std::to_string(d)));
  }
  if (out.empty()) {
    throw Error(ErrorCode::Io, "no " + split + " files (domain1_" + split + ".csv, ...) in '" +
                                   dir.string() + "'");
  }
  return out;
}

std::string method_tag(const AlignmentModel& m) {
  switch (m.mode) {
    case AlignmentMode::Primal: return "ssma";
    case AlignmentMode::Dual: return "kema";
    case AlignmentMode::Reduced: return "rekema";
  }
  return "unknown";
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

struct MeanStd {
  double mean = 0.0, std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  r.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return r;
}

// Resolved option values of a subcommand, for manifests.
json resolved_config(const CLI::App* app) {
  json cfg = json::object();
  for (const CLI::Option* o : app->get_options()) {
    if (o->get_lnames().empty()) continue;
    const std::string& name = o->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (o->count() > 0) {
      const auto& res = o->results();
      cfg[name] = res.size() == 1 ? res.front() : CLI::detail::join(res, ",");
    } else {
      cfg[name] = o->get_default_str();
    }
  }
  return cfg;
}

json manifest_base(const std::string& command, const CLI::App* app, std::uint64_t seed) {
  return {{"tool", "kema"},
          {"library_version", kLibraryVersion},
          {"generator_version", toy::kGeneratorVersion},
          {"command", command},
          {"seed", seed},
          {"config", resolved_config(app)}};
}

json distortion_json(const DistortionSpec& d) {
  json j = {{"reverse_class_order", d.reverse_class_order},
            {"as_line", d.as_line},
            {"add_third_dim", d.add_third_dim},
            {"noise_std", d.noise_std}};
  j["scale"] = d.scale ? json(*d.scale) : json(nullptr);
  j["rotation"] = d.rotation ? json(*d.rotation) : json(nullptr);
  return j;
}

std::vector<std::string> write_latent_svgs(const fs::path& out_dir, const AlignmentModel& model,
                                           const std::vector<DomainDataset>& train) {
  if (model.num_features() < 2) return {};
  std::vector<ScatterPoint> by_domain, by_class;
  for (std::size_t d = 0; d < train.size(); ++d) {
    const Matrix z = project(model, d, train[d].features);
    for (Index j = 0; j < z.cols(); ++j) {
      by_domain.push_back({z(0, j), z(1, j), static_cast<int>(d)});
      if (train[d].labels[j] != 0) by_class.push_back({z(0, j), z(1, j), train[d].labels[j] - 1});
    }
  }
  write_text(out_dir / "latent_domains.svg", svg_scatter(by_domain, "Domains"));
  write_text(out_dir / "latent_classes.svg", svg_scatter(by_class, "Classes"));
  return {"latent_domains.svg", "latent_classes.svg"};
}

// ---------------------------------------------------------------------------

struct GenArgs {
  int exp = 1;
  std::string sizes = "standard";
  std::uint64_t seed = 0;
  std::string out = ".";
};

int cmd_gen(const GenArgs& a, const CLI::App* app, std::ostream& out) {
  const auto sizes = a.sizes == "sweep" ? SampleSizes::ReducedRankSweep : SampleSizes::Standard;
  const ToyExperiment e = experiment_preset(a.exp, sizes);
  const ExperimentData data = generate_experiment(e, a.seed);
  const fs::path dir = a.out;
  json files = json::array();
  for (int d = 1; d <= 2; ++d) {
    for (const char* split : {"train", "test"}) {
      const auto& ds = std::string(split) == "train" ? data.train[d - 1] : data.test[d - 1];
      const fs::path f = split_file(dir, d, split);
      write_dataset_csv(f, ds);
      files.push_back(f.filename().string());
    }
  }
  json m = manifest_base("gen", app, a.seed);
  m["experiment"] = {{"id", e.id},
                     {"layout", e.spiral.layout == SpiralLayout::Arms ? "arms" : "segments"},
                     {"labeled_per_class", e.labeled_per_class},
                     {"unlabeled", e.unlabeled},
                     {"test", e.test},
                     {"domain1", distortion_json(e.domain1)},
                     {"domain2", distortion_json(e.domain2)}};
  m["outputs"] = files;
  write_json(dir / "manifest.json", m);
  out << "wrote " << files.size() << " dataset files to " << dir.string() << "\n";
  return 0;
}

struct FitArgs {
  FitOptions fit;
  std::string data;
  std::uint64_t seed = 0;
  std::string out = ".";
  bool svg = false;
};

int cmd_fit(const FitArgs& a, const CLI::App* app, std::ostream& out) {
  const auto train = load_split(a.data, "train");
  const AlignmentProblem p = make_problem(a.fit, train);
  const Fitted f = fit_method(a.fit, p, a.seed);
  const fs::path dir = a.out;
  save_model(dir / "model.json", f.model);
  write_eigenvalues_csv(dir / "eigenvalues.csv", f.model.eigenvalues);
  json outputs = {"model.json", "eigenvalues.csv"};
  if (a.svg) {
    for (const auto& s : write_latent_svgs(dir, f.model, train)) outputs.push_back(s);
  }
  json m = manifest_base("fit", app, a.seed);
  m["mode"] = to_string(f.model.mode);
  m["num_features"] = f.model.num_features();
  m["max_residual"] = f.model.diagnostics.max_residual;
  json kernels = json::array();
  for (const auto& b : f.model.domains) kernels.push_back(to_string(b.kernel));
  m["resolved_kernels"] = kernels;
  if (!f.representatives.empty()) m["representatives"] = f.representatives;
  m["outputs"] = outputs;
  write_json(dir / "manifest.json", m);
  out << "fitted " << method_tag(f.model) << " (" << to_string(f.model.mode) << ") with "
      << f.model.num_features() << " features, max residual "
      << fmt("%.2e", f.model.diagnostics.max_residual) << "\n";
  return 0;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string target = "all";
  std::string classifier = "linear";
  int max_features = 0;
  bool source_only = false;
  bool baseline = false;
  std::string out = ".";
};

int cmd_eval(const EvalArgs& a, const CLI::App* app, std::ostream& out) {
  const AlignmentModel model = load_model(a.model);
  const auto train = load_split(a.data, "train");
  const auto test = load_split(a.data, "test");
  std::vector<std::size_t> targets;
  if (a.target == "all") {
    for (std::size_t d = 0; d < model.domains.size(); ++d) targets.push_back(d);
  } else {
    targets.push_back(model.domain_index(a.target));
  }
  CurveOptions co;
  co.classifier = parse_classifier(a.classifier);
  co.max_features = a.max_features;
  co.source_only = a.source_only;
  std::vector<ErrorCurve> curves;
  for (std::size_t t : targets) {
    curves.push_back(error_curve(model, train, test, t, method_tag(model), co));
    if (a.baseline) {
      const int mf = static_cast<int>(curves.back().feature_counts.size());
      curves.push_back(baseline_curve(train[t], test[t], mf, co.classifier));
    }
  }
  const fs::path dir = a.out;
  write_curves_csv(dir / "curves.csv", curves);
  json m = manifest_base("eval", app, 0);
  m["outputs"] = {"curves.csv"};
  write_json(dir / "manifest.json", m);
  write_curves_csv(out, curves);
  return 0;
}

struct InvertArgs {
  FitOptions fit;
  int exp = 0;
  int runs = 1;
  std::string model;
  std::string data;
  std::string source = "2";
  std::string target = "1";
  int inv_features = 0;
  double pinv_tol = kInversionTolerance;
  std::uint64_t seed = 0;
  std::string out = ".";
};

int cmd_invert(const InvertArgs& a, const CLI::App* app, std::ostream& out, std::ostream& err) {
  if (a.runs < 1) throw Error(ErrorCode::InvalidArgument, "--runs must be positive");
  InversionOptions io;
  io.num_features = a.inv_features;
  io.rel_tol = a.pinv_tol;
  std::vector<double> errors;
  bool deficient = false;
  std::string method;
  auto one = [&](const AlignmentModel& model, const std::vector<DomainDataset>& test) {
    const std::size_t s = model.domain_index(a.source), t = model.domain_index(a.target);
    if (test[s].size() != test[t].size()) {
      throw Error(ErrorCode::DimensionMismatch, "source and target test sets are not paired");
    }
    const InversionResult r = invert(model, s, t, test[s].features, io);
    deficient = deficient || r.rank_deficient;
    errors.push_back(reconstruction_error(test[t].features, r.reconstruction));
  };
  if (a.exp != 0) {
    if (!a.model.empty()) throw Error(ErrorCode::InvalidArgument, "--exp and --model exclude each other");
    const ToyExperiment e = experiment_preset(a.exp);
    for (int run = 0; run < a.runs; ++run) {
      const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(run);
      const ExperimentData data = generate_experiment(e, seed);
      const Fitted f = fit_method(a.fit, make_problem(a.fit, data.train), seed);
      method = method_tag(f.model);
      one(f.model, data.test);
    }
  } else {
    if (a.model.empty() || a.data.empty()) {
      throw Error(ErrorCode::InvalidArgument, "invert needs --exp, or --model with --data");
    }
    if (a.runs != 1) throw Error(ErrorCode::InvalidArgument, "--runs needs --exp");
    const AlignmentModel model = load_model(a.model);
    method = method_tag(model);
    one(model, load_split(a.data, "test"));
  }
  if (deficient) {
    err << "warning: RankDeficientTarget: latent basis of domain " << a.target
        << " has rank below its dimension; the reconstruction is lossy\n";
  }
  const MeanStd ms = mean_std(errors);
  const std::string summary = fmt("%.2f ± %.2f", ms.mean, ms.std);
  json j = manifest_base("invert", app, a.seed);
  j["method"] = method;
  j["source"] = a.source;
  j["target"] = a.target;
  j["runs"] = errors.size();
  j["errors"] = errors;
  j["mean"] = ms.mean;
  j["std"] = ms.std;
  j["summary"] = summary;
  j["rank_deficient"] = deficient;
  write_json(fs::path(a.out) / "reconstruction.json", j);
  out << summary << "\n";
  return 0;
}

struct BoundsArgs {
  FitOptions fit;
  std::string data;
  int m = 5;
  double delta = 0.1;
  double radius = -1.0;
  bool normalize = false;
  std::string out = ".";
};

int cmd_bounds(const BoundsArgs& a, const CLI::App* app, std::ostream& out) {
  const AlignmentProblem p = make_problem(a.fit, load_split(a.data, "train"));
  const Matrix ks = compute_kstar(p);
  std::optional<double> radius;
  if (a.radius >= 0.0) radius = a.radius;
  const BoundsReport r = spectral_bounds(ks, a.m, a.delta, radius, a.normalize);
  json j = bounds_to_json(r);
  write_json(fs::path(a.out) / "bounds.json", j);
  json m = manifest_base("bounds", app, 0);
  m["outputs"] = {"bounds.json"};
  write_json(fs::path(a.out) / "manifest.json", m);
  json brief = j;
  brief.erase("empirical_eigenvalues");
  out << brief.dump(2) << "\n";
  return 0;
}

struct ReproduceArgs {
  int runs = 10;
  std::uint64_t seed = 0;
  std::string out = "reproduce";
  std::string parts = "fig1,fig2,fig3";
  std::string classifier = "linear";
};

FitOptions preset_fit(const std::string& method, const std::string& kernel) {
  FitOptions o;
  o.method = method;
  o.kernel = kernel;
  return o;
}

double best_accuracy(const AlignmentModel& model, const ExperimentData& data, Classifier c) {
  CurveOptions co;
  co.classifier = c;
  std::vector<ErrorCurve> cs;
  for (std::size_t t = 0; t < data.test.size(); ++t) {
    cs.push_back(error_curve(model, data.train, data.test, t, "x", co));
  }
  return 100.0 * (1.0 - min_error(mean_curve(cs, "mean")));
}

int cmd_reproduce(const ReproduceArgs& a, const CLI::App* app, std::ostream& out) {
  const fs::path dir = a.out;
  const Classifier cls = parse_classifier(a.classifier);
  std::set<std::string> parts;
  for (const auto& p : split_list(a.parts)) parts.insert(p);
  std::ostringstream md;
  json outputs = json::array();

  if (parts.count("fig1")) {
    md << "## Error curves (minimum error over 1..20 features)\n\n"
       << "| Exp. | target | baseline | SSMA | KEMA lin | KEMA RBF |\n|---|---|---|---|---|---|\n";
    for (int id = 1; id <= 4; ++id) {
      const ExperimentData data = generate_experiment(experiment_preset(id), a.seed);
      std::vector<std::pair<std::string, AlignmentModel>> models;
      models.emplace_back("ssma", fit_ssma(make_problem(preset_fit("ssma", "linear"), data.train)));
      models.emplace_back("kema_lin", fit_kema(make_problem(preset_fit("kema", "linear"), data.train)));
      models.emplace_back("kema_rbf", fit_kema(make_problem(preset_fit("kema", "rbf:auto"), data.train)));
      std::vector<ErrorCurve> curves;
      for (std::size_t t = 0; t < 2; ++t) {
        CurveOptions co;
        co.classifier = cls;
        std::vector<double> best;
        std::vector<std::vector<std::pair<double, double>>> series;
        std::vector<std::string> names;
        for (const auto& [tag, m] : models) {
          curves.push_back(error_curve(m, data.train, data.test, t, tag, co));
          best.push_back(min_error(curves.back()));
        }
        curves.push_back(baseline_curve(data.train[t], data.test[t], 20, cls));
        const double base = curves.back().error_rates.front();
        for (std::size_t c = curves.size() - models.size() - 1; c < curves.size(); ++c) {
          std::vector<std::pair<double, double>> s;
          for (std::size_t i = 0; i < curves[c].feature_counts.size(); ++i) {
            s.emplace_back(curves[c].feature_counts[i], curves[c].error_rates[i]);
          }
          series.push_back(std::move(s));
          names.push_back(curves[c].method);
        }
        const std::string svg = "fig1_exp" + std::to_string(id) + "_target" + std::to_string(t + 1) + ".svg";
        write_text(dir / svg, svg_polylines(series, names,
                                            "Exp. " + std::to_string(id) + ", target domain " +
                                                std::to_string(t + 1) + ": error vs features"));
        outputs.push_back(svg);
        md << "| " << id << " | " << t + 1 << " | " << fmt("%.3f", base);
        for (double b : best) md << " | " << fmt("%.3f", b);
        md << " |\n";
      }
      const std::string csv = "fig1_exp" + std::to_string(id) + ".csv";
      write_curves_csv(dir / csv, curves);
      outputs.push_back(csv);
    }
    md << "\n";
  }

  if (parts.count("fig2")) {
    const ExperimentData data =
        generate_experiment(experiment_preset(1, SampleSizes::ReducedRankSweep), a.seed);
    const AlignmentProblem lin = make_problem(preset_fit("ssma", "linear"), data.train);
    const AlignmentProblem rbf = make_problem(preset_fit("kema", "rbf:auto"), data.train);
    json row = json::object();
    double base = 0.0;
    for (std::size_t t = 0; t < 2; ++t) {
      base += 50.0 * (1.0 - baseline_curve(data.train[t], data.test[t], 1, cls).error_rates[0]);
    }
    row["baseline"] = base;
    row["ssma"] = best_accuracy(fit_ssma(lin), data, cls);
    for (double frac : {0.01, 0.10, 0.25, 0.50}) {
      const auto reps = select_representatives(data.train, frac, a.seed);
      row["rekema_" + std::to_string(static_cast<int>(std::lround(frac * 100))) + "%"] =
          best_accuracy(fit_rekema(rbf, reps), data, cls);
    }
    row["kema"] = best_accuracy(fit_kema(rbf), data, cls);
    md << "## Reduced-rank sweep (accuracy %, best over features, mean of both domains)\n\n|";
    for (auto it = row.begin(); it != row.end(); ++it) md << " " << it.key() << " |";
    md << "\n|";
    for (std::size_t i = 0; i < row.size(); ++i) md << "---|";
    md << "\n|";
    for (auto it = row.begin(); it != row.end(); ++it) {
      md << " " << fmt("%.2f", it.value().get<double>()) << " |";
    }
    md << "\n\n";
    write_json(dir / "fig2.json", row);
    outputs.push_back("fig2.json");
  }

  if (parts.count("fig3")) {
    md << "## Inversion error, domain 2 -> domain 1 (mean ± std over " << a.runs
       << " runs)\n\n| Exp. | SSMA | KEMA lin->lin | KEMA RBF->lin |\n|---|---|---|---|\n";
    json table = json::object();
    for (int id = 1; id <= 4; ++id) {
      std::vector<double> e_ssma, e_lin, e_rbf;
      for (int run = 0; run < a.runs; ++run) {
        const ExperimentData data = generate_experiment(experiment_preset(id), a.seed + run);
        auto err = [&](const AlignmentModel& m) {
          const InversionResult r = invert(m, 1, 0, data.test[1].features);
          return reconstruction_error(data.test[0].features, r.reconstruction);
        };
        e_ssma.push_back(err(fit_ssma(make_problem(preset_fit("ssma", "linear"), data.train))));
        e_lin.push_back(err(fit_kema(make_problem(preset_fit("kema", "linear"), data.train))));
        e_rbf.push_back(err(fit_kema(make_problem(preset_fit("kema", "linear,rbf:auto"), data.train))));
      }
      json row = json::object();
      md << "| " << id;
      const std::vector<std::pair<std::string, const std::vector<double>*>> cols = {
          {"ssma", &e_ssma}, {"kema_lin_lin", &e_lin}, {"kema_rbf_lin", &e_rbf}};
      for (const auto& [name, v] : cols) {
        const MeanStd ms = mean_std(*v);
        row[name] = {{"mean", ms.mean}, {"std", ms.std}, {"errors", *v}};
        md << " | " << fmt("%.2f ± %.2f", ms.mean, ms.std);
      }
      md << " |\n";
      table["exp" + std::to_string(id)] = row;
    }
    md << "\n";
    write_json(dir / "fig3.json", table);
    outputs.push_back("fig3.json");
  }

  write_text(dir / "summary.md", md.str());
  outputs.push_back("summary.md");
  json m = manifest_base("reproduce", app, a.seed);
  m["outputs"] = outputs;
  write_json(dir / "manifest.json", m);
  out << md.str();
  return 0;
}

// Appends config-file entries for keys the user did not pass, so flags win.
std::vector<std::string> merge_config(const std::vector<std::string>& args, const CLI::App& app) {
  std::string config_path;
  std::set<std::string> given;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& s = args[i];
    if (s.rfind("--", 0) != 0) continue;
    const auto eq = s.find('=');
    const std::string name = s.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(name);
    if (name == "config") {
      if (eq != std::string::npos) {
        config_path = s.substr(eq + 1);
      } else if (i + 1 < args.size()) {
        config_path = args[i + 1];
      }
    }
  }
  if (config_path.empty() || args.empty()) return args;
  const CLI::App* sub = nullptr;
  for (const CLI::App* s : app.get_subcommands({})) {
    if (s->get_name() == args.front()) sub = s;
  }
  if (!sub) return args;
  std::vector<std::string> merged = args;
  FlatConfig cfg;
  try {
    cfg = read_config(config_path);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Parse) throw;
    throw Error(ErrorCode::InvalidArgument, std::string("config file: ") + e.what());
  }
  for (const auto& [key, value] : cfg) {
    if (given.count(key)) continue;
    if (key == "config" || sub->get_option_no_throw("--" + key) == nullptr) {
      throw Error(ErrorCode::InvalidArgument,
                  "config key '" + key + "' is not an option of '" + args.front() + "'");
    }
    merged.push_back("--" + key + "=" + value);
  }
  return merged;
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel manifold alignment toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "generate a toy experiment");
  g->add_option("--exp", gen.exp, "experiment id 1..4")->required();
  g->add_option("--sizes", gen.sizes, "standard | sweep")->check(CLI::IsMember({"standard", "sweep"}));

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "fit an alignment model");
  add_fit_options(f, fit.fit, true);
  f->add_option("--data", fit.data, "directory with domain<d>_train.csv files")->required();
  f->add_flag("--svg", fit.svg, "write latent scatter plots");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "error curves of a fitted model");
  e->add_option("--model", ev.model, "model JSON")->required();
  e->add_option("--data", ev.data, "directory with train and test CSVs")->required();
  e->add_option("--target", ev.target, "target domain id or 'all'");
  e->add_option("--classifier", ev.classifier, "linear | 1nn")->check(CLI::IsMember({"linear", "1nn"}));
  e->add_option("--max-features", ev.max_features, "largest feature count (0 = all)");
  e->add_flag("--source-only", ev.source_only, "train on non-target domains only");
  e->add_flag("--baseline", ev.baseline, "add the target-only input-space baseline");

  InvertArgs inv;
  inv.fit.kernel = "linear,rbf:auto";
  auto* iv = app.add_subcommand("invert", "map samples into another domain's feature space");
  add_fit_options(iv, inv.fit, true);
  iv->add_option("--exp", inv.exp, "regenerate experiment id per run");
  iv->add_option("--runs", inv.runs, "repetitions with seeds seed+run");
  iv->add_option("--model", inv.model, "model JSON (instead of --exp)");
  iv->add_option("--data", inv.data, "directory with paired test CSVs (with --model)");
  iv->add_option("--source", inv.source, "source domain id");
  iv->add_option("--target", inv.target, "target domain id (linear kernel)");
  iv->add_option("--inv-features", inv.inv_features, "latent features used (0 = target dimension)");
  iv->add_option("--pinv-tol", inv.pinv_tol, "relative pseudo-inverse cutoff");

  BoundsArgs bd;
  auto* b = app.add_subcommand("bounds", "stability bounds of the dual problem");
  add_fit_options(b, bd.fit, false);
  b->add_option("--data", bd.data, "directory with domain<d>_train.csv files")->required();
  b->add_option("--m", bd.m, "subspace dimension");
  b->add_option("--delta", bd.delta, "confidence parameter in (0, 1)");
  b->add_option("--radius", bd.radius, "feature-space radius (negative = estimate)");
  b->add_flag("--normalize", bd.normalize, "divide empirical eigenvalues by n");

  ReproduceArgs rp;
  auto* r = app.add_subcommand("reproduce", "run the toy experiment suite");
  r->add_option("--runs", rp.runs, "inversion repetitions");
  r->add_option("--parts", rp.parts, "comma list of fig1, fig2, fig3");
  r->add_option("--classifier", rp.classifier, "linear | 1nn")->check(CLI::IsMember({"linear", "1nn"}));

  std::string config_file;
  for (auto* sub : {g, f, e, iv, b, r}) {
    sub->add_option("--config", config_file, "flat key = value config file");
  }
  g->add_option("--seed", gen.seed, "random seed");
  f->add_option("--seed", fit.seed, "random seed (representative draw)");
  iv->add_option("--seed", inv.seed, "base seed; run r uses seed + r");
  r->add_option("--seed", rp.seed, "base seed");
  g->add_option("--out", gen.out, "output directory");
  f->add_option("--out", fit.out, "output directory");
  e->add_option("--out", ev.out, "output directory");
  iv->add_option("--out", inv.out, "output directory");
  b->add_option("--out", bd.out, "output directory");
  r->add_option("--out", rp.out, "output directory");

  try {
    std::vector<std::string> args = merge_config(args_in, app);
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
      app.parse(rev);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& pe) {
      err << "usage error: " << pe.what() << "\n";
      if (pe.get_exit_code() == 0) return 0;
      return kUsageExit;
    }
    if (g->parsed()) return cmd_gen(gen, g, out);
    if (f->parsed()) return cmd_fit(fit, f, out);
    if (e->parsed()) return cmd_eval(ev, e, out);
    if (iv->parsed()) return cmd_invert(inv, iv, out, err);
    if (b->parsed()) return cmd_bounds(bd, b, out);
    if (r->parsed()) return cmd_reproduce(rp, r, out);
    return kUsageExit;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code(error_class(ex.code()));
  } catch (const fs::filesystem_error& ex) {
    err << "error: Io: " << ex.what() << "\n";
    return exit_code(ErrorClass::Io);
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace kema::cli
