// isoscope: bodies, measures and Monte Carlo functionals of asymptotic
// convex geometry, with a declarative experiment harness.
//
//   isoscope isotropy   --body '{"type":"cube","n":12}' --samples 100000 --seed 7
//   isoscope estimate meanwidth --body '{"type":"ball","n":8,"r":1}' --dirs 10000 --seed 7
//   isoscope radius section --body '{"type":"cube","n":8}' --subspace axes:3 --seed 1
//   isoscope experiment run thm13_zq_section --config cfg.json
//
// All randomness derives from --seed; if absent, a random seed is drawn and
// recorded in the output. --threads changes wall time only, never results.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>

#include "isoscope/centroid.hpp"
#include "isoscope/experiments.hpp"
#include "isoscope/functionals.hpp"
#include "isoscope/isotropy.hpp"
#include "isoscope/json_io.hpp"
#include "isoscope/parallel.hpp"
#include "isoscope/radii.hpp"

using namespace isoscope;

namespace {

struct GlobalOpts {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  std::string output;
};

std::uint64_t resolve_seed(GlobalOpts& g) {
  if (!g.seed_given) {
    std::random_device rd;
    g.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  return g.seed;
}

json parse_inline_or_file(const std::string& text, const char* what) {
  if (text.empty()) throw ConfigError(std::string("missing --") + what);
  std::string payload = text;
  if (!text.empty() && text[0] != '{' && text[0] != '[') {
    std::ifstream in(text);
    if (!in) throw ConfigError(std::string("cannot read file for --") + what + ": " + text);
    payload.assign(std::istreambuf_iterator<char>(in), {});
  }
  try {
    return json::parse(payload);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("malformed JSON for --") + what + ": " + e.what());
  }
}

Vec resolve_direction(const std::string& spec, int n, RngStream& rng) {
  if (spec.empty() || spec == "random") return sample_sphere(n, rng);
  json j = parse_inline_or_file(spec, "dir");
  if (!j.is_array()) throw ConfigError("--dir must be \"random\" or a JSON array");
  Vec v(j.size());
  for (int i = 0; i < static_cast<int>(j.size()); ++i) v[i] = j[i].get<double>();
  if (v.size() != n) throw ConfigError("--dir has wrong length for this measure/body");
  const double nr = v.norm();
  if (nr <= 0) throw ConfigError("--dir must be a nonzero vector");
  return v / nr;
}

Subspace resolve_subspace(const std::string& spec, int n, RngStream& rng) {
  if (spec.rfind("axes:", 0) == 0) {
    const int m = std::stoi(spec.substr(5));
    if (m < 1 || m > n) throw ConfigError("--subspace axes:m needs 1 <= m <= n");
    return Subspace::axes(n, m);
  }
  if (spec.rfind("random:", 0) == 0) {
    const int m = std::stoi(spec.substr(7));
    if (m < 1 || m > n) throw ConfigError("--subspace random:m needs 1 <= m <= n");
    return sample_grassmannian(n, m, rng);
  }
  if (spec.rfind("file:", 0) == 0) {
    json j = parse_inline_or_file(spec.substr(5), "subspace");
    return Subspace(mat_from_json(j, "frame"));
  }
  throw ConfigError("--subspace must be axes:m, random:m or file:path");
}

json estimate_to_json(const Estimate& e) {
  json j = {{"value", e.value},       {"stderr", e.stderr_},
            {"n_samples", e.n_samples}, {"seed", e.seed},
            {"method", e.method}};
  if (e.dropped_zeros) j["dropped_zeros"] = e.dropped_zeros;
  if (e.divergence_flag) j["divergence_flag"] = true;
  if (e.heavy_tail_flag) j["heavy_tail_flag"] = true;
  return j;
}

json radius_to_json(const RadiusResult& r) {
  return {{"value", r.value},
          {"argmax_direction", vec_to_json(r.argmax_direction)},
          {"n_evals", r.n_evals},
          {"certified_lower_bound", r.certified_lower_bound}};
}

void emit(const json& j, const GlobalOpts& g) {
  if (g.output.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(g.output);
    if (!out) throw ConfigError("cannot open --output " + g.output);
    out << j.dump(2) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isoscope: empirical asymptotic convex geometry"};
  app.require_subcommand(1);
  app.fallthrough(true);  // global flags may follow the subcommand

  GlobalOpts g;
  app.add_option("--seed", g.seed, "root seed (random but recorded when absent)")
      ->each([&](const std::string&) { g.seed_given = true; });
  app.add_option("--threads", g.threads,
                 "worker threads (default: ISOSCOPE_THREADS or all cores)");
  app.add_option("--output,-o", g.output, "output path (default stdout)");

  std::string body_txt, measure_txt, dir_txt = "random", subspace_txt, config_txt;
  long samples = 100000, dirs = 10000;
  double qval = 2.0, alpha = 2.0;
  int t_codim = 1, n_subspaces = 8;
  MaximizerConfig opt;

  auto* iso = app.add_subcommand("isotropy", "isotropic position and constants");
  iso->add_option("--body", body_txt, "body JSON (inline or file)");
  iso->add_option("--measure", measure_txt, "measure JSON (inline or file)");
  iso->add_option("--samples", samples, "Monte Carlo sample count");

  auto* est = app.add_subcommand("estimate", "Monte Carlo functional estimates");
  std::string functional;
  est->add_option("functional", functional,
                  "meanwidth|centroid|centroid-meanwidth|iq|vrad-section|"
                  "psi-alpha|psi2")
      ->required();
  est->add_option("--body", body_txt, "body JSON");
  est->add_option("--measure", measure_txt, "measure JSON");
  est->add_option("--q", qval, "moment order q");
  est->add_option("--alpha", alpha, "Orlicz exponent in [1,2]");
  est->add_option("--dir", dir_txt, "direction: random or JSON vector");
  est->add_option("--subspace", subspace_txt, "axes:m | random:m | file:path");
  est->add_option("--samples", samples, "inner sample count");
  est->add_option("--dirs", dirs, "sphere direction count");

  auto* rad = app.add_subcommand("radius", "extremal radii over subspaces");
  std::string radius_kind;
  rad->add_option("kind", radius_kind, "section|projection|gelfand|rotation")
      ->required();
  rad->add_option("--body", body_txt, "body JSON")->required();
  rad->add_option("--subspace", subspace_txt, "axes:m | random:m | file:path");
  rad->add_option("--t", t_codim, "codimension for gelfand");
  rad->add_option("--n-subspaces", n_subspaces, "subspace draws for gelfand");
  rad->add_option("--coarse", opt.n_coarse, "coarse directions");
  rad->add_option("--starts", opt.n_starts, "refinement starts");
  rad->add_option("--refine-steps", opt.refine_steps, "refinement steps");

  auto* exp = app.add_subcommand("experiment", "theorem-scale experiment sweeps");
  exp->require_subcommand(1);
  auto* exp_list = exp->add_subcommand("list", "list experiment names");
  auto* exp_run = exp->add_subcommand("run", "run one experiment");
  std::string exp_name;
  exp_run->add_option("name", exp_name, "experiment name")->required();
  exp_run->add_option("--config", config_txt, "config JSON (inline or file)");

  try {
    app.parse(argc, argv);

    if (g.threads > 0) par::set_threads(g.threads);
    const std::uint64_t seed = resolve_seed(g);
    RngStream root(seed);

    if (iso->parsed()) {
      if (!measure_txt.empty()) {
        LogConcaveMeasure mu(measure_from_json(parse_inline_or_file(measure_txt, "measure")));
        const double L = isotropic_constant(mu, samples, root.derive(1));
        emit({{"L", L},
              {"samples", samples},
              {"seed", seed},
              {"measure", measure_to_json(mu.descriptor())}},
             g);
      } else {
        ConvexBody body(body_from_json(parse_inline_or_file(body_txt, "body")));
        const IsotropicResult r = isotropic_transform(body, samples, root.derive(1));
        emit({{"L", r.L},
              {"stderr", r.L_stderr},
              {"transform", mat_to_json(r.transform)},
              {"translation", vec_to_json(r.translation)},
              {"samples", samples},
              {"seed", seed},
              {"body", body_to_json(body.descriptor())}},
             g);
      }
      return 0;
    }

    if (est->parsed()) {
      json out;
      if (functional == "meanwidth") {
        ConvexBody body(body_from_json(parse_inline_or_file(body_txt, "body")));
        out = estimate_to_json(mean_width(body, dirs, root.derive(1)));
        out["body"] = body_to_json(body.descriptor());
      } else if (functional == "iq") {
        RngStream rs = root.derive(1);
        if (!measure_txt.empty()) {
          LogConcaveMeasure mu(measure_from_json(parse_inline_or_file(measure_txt, "measure")));
          out = estimate_to_json(moment_radius(mu, qval, samples, rs));
        } else {
          ConvexBody body(body_from_json(parse_inline_or_file(body_txt, "body")));
          out = estimate_to_json(moment_radius(body, qval, samples, rs));
        }
        out["q"] = qval;
      } else if (functional == "vrad-section") {
        ConvexBody body(body_from_json(parse_inline_or_file(body_txt, "body")));
        RngStream rs = root.derive(1);
        const Subspace F = resolve_subspace(subspace_txt, body.dim(), rs);
        out = estimate_to_json(vrad_section(body, F, dirs, root.derive(2)));
      } else {
        LogConcaveMeasure mu(measure_from_json(parse_inline_or_file(measure_txt, "measure")));
        RngStream rs = root.derive(1);
        const Vec y = resolve_direction(dir_txt, mu.dim(), rs);
        if (functional == "centroid")
          out = estimate_to_json(centroid_support(mu, qval, y, samples, root.derive(2)));
        else if (functional == "centroid-meanwidth")
          out = estimate_to_json(
              centroid_mean_width(mu, qval, dirs, samples, root.derive(2)));
        else if (functional == "psi-alpha")
          out = estimate_to_json(psi_alpha_norm(mu, y, alpha, samples, root.derive(2)));
        else if (functional == "psi2")
          out = estimate_to_json(psi2_support(mu, y, samples, root.derive(2)));
        else
          throw ConfigError("unknown functional \"" + functional + "\"");
        out["q"] = qval;
        out["dir"] = vec_to_json(y);
      }
      out["seed"] = seed;
      emit(out, g);
      return 0;
    }

    if (rad->parsed()) {
      ConvexBody body(body_from_json(parse_inline_or_file(body_txt, "body")));
      RngStream rs = root.derive(1);
      json out;
      if (radius_kind == "section" || radius_kind == "projection") {
        if (subspace_txt.empty()) throw ConfigError("missing --subspace");
        const Subspace F = resolve_subspace(subspace_txt, body.dim(), rs);
        const RadiusResult r = radius_kind == "section"
                                   ? section_radius(body, F, opt, root.derive(2))
                                   : projection_radius(body, F, opt, root.derive(2));
        out = radius_to_json(r);
        out["subspace_dim"] = F.dim();
      } else if (radius_kind == "gelfand") {
        out = radius_to_json(
            gelfand_upper(body, t_codim, n_subspaces, opt, root.derive(2)));
        out["t"] = t_codim;
        out["n_subspaces"] = n_subspaces;
      } else if (radius_kind == "rotation") {
        const Mat U = sample_orthogonal(body.dim(), rs);
        out = radius_to_json(rotation_intersection_radius(body, U, opt, root.derive(2)));
      } else {
        throw ConfigError("unknown radius kind \"" + radius_kind + "\"");
      }
      out["seed"] = seed;
      out["body"] = body_to_json(body.descriptor());
      emit(out, g);
      return 0;
    }

    if (exp_list->parsed()) {
      json names = json::array();
      for (const auto& n : experiment_names()) names.push_back(n);
      emit(names, g);
      return 0;
    }

    if (exp_run->parsed()) {
      if (!is_experiment(exp_name))
        throw ConfigError("unknown experiment \"" + exp_name + "\"");
      json cfg = config_txt.empty() ? json::object()
                                    : parse_inline_or_file(config_txt, "config");
      if (g.seed_given) cfg["seed"] = seed;
      else if (!cfg.contains("seed")) cfg["seed"] = seed;  // recorded below
      const ExperimentResult res = run_experiment(exp_name, cfg);
      const std::string csv_path = g.output.empty() ? exp_name + ".csv" : g.output;
      write_csv(res.rows, csv_path);
      write_metadata_sidecar(res.metadata, csv_path);
      const Summary s = summarize(res.rows, experiment_bracket(exp_name),
                                  experiment_swept(exp_name));
      json out = summary_to_json(s);
      out["rows"] = res.rows.size();
      out["csv"] = csv_path;
      out["seed"] = cfg["seed"];
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    throw ConfigError("no subcommand selected");
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
