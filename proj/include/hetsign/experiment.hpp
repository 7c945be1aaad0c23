#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hetsign/csv.hpp"
#include "hetsign/data.hpp"
#include "hetsign/fixtures.hpp"
#include "hetsign/nn.hpp"
#include "hetsign/propagate.hpp"
#include "hetsign/svg.hpp"
#include "hetsign/synth.hpp"
#include "hetsign/uncertainty.hpp"

namespace hetsign {

inline constexpr const char* kVersion = "hetsign 0.1.0";

// Monte Carlo sweep grid for the expectation checks.
struct LatticeConfig {
  std::vector<double> homophily{0.0, 0.3, 0.5, 0.7, 1.0};
  std::vector<double> error{0.0, 0.1, 0.3};
  std::vector<int> classes{2, 3, 5};
  std::vector<int> degree{4, 16};
  int seeds = 100;
  int min_nodes = 1000;

  void validate() const {
    if (homophily.empty() || error.empty() || classes.empty() || degree.empty())
      throw std::invalid_argument("lattice: empty axis");
    for (double b : homophily)
      if (b < 0.0 || b > 1.0) throw std::invalid_argument("lattice: homophily outside [0, 1]");
    for (double e : error)
      if (e < 0.0 || e > 1.0) throw std::invalid_argument("lattice: error outside [0, 1]");
    for (int c : classes)
      if (c < 2) throw std::invalid_argument("lattice: classes must be >= 2");
    for (int d : degree)
      if (d < 1) throw std::invalid_argument("lattice: degree must be >= 1");
    if (seeds < 2) throw std::invalid_argument("lattice: need >= 2 seeds");
    if (min_nodes < 10) throw std::invalid_argument("lattice: need >= 10 nodes");
  }
};

struct ExperimentConfig {
  std::string command;
  std::filesystem::path out_dir = "out";
  uint64_t seed = 1;
  int reps = 10;

  std::string dataset_path;               // load a bundle from disk
  std::string citation;                   // "cora" or "tiny" built-in stand-in
  std::optional<SynthConfig> synth;       // or generate per repetition

  std::vector<Regime> regimes{Regime::vanilla, Regime::signed_edges, Regime::zero_weight};
  double error_rate = 0.0;
  std::vector<double> lambda_grid{0.0, 0.1, 0.2, 0.3, 0.5, 1.0};
  int max_layers = 6;
  int ablation_hops = 2;
  int split_per_class = 20;
  TrainConfig train;
  int resolution = 129;
  int integral_cells = 1024;
  double fault_injection = 0.0;
  LatticeConfig lattice;

  void validate() const {
    if (reps < 1) throw std::invalid_argument("config: reps must be >= 1");
    if (error_rate < 0.0 || error_rate > 1.0)
      throw std::invalid_argument("config: error_rate outside [0, 1]");
    if (lambda_grid.empty()) throw std::invalid_argument("config: empty lambda grid");
    for (double l : lambda_grid)
      if (l < 0.0 || l > 1.0) throw std::invalid_argument("config: lambda outside [0, 1]");
    if (regimes.empty()) throw std::invalid_argument("config: empty regime set");
    if (resolution < 2) throw std::invalid_argument("config: resolution must be >= 2");
    if (integral_cells < 1) throw std::invalid_argument("config: integral_cells must be >= 1");
    if (max_layers < 0) throw std::invalid_argument("config: max_layers must be >= 0");
    if (ablation_hops < 1) throw std::invalid_argument("config: ablation_hops must be >= 1");
    if (split_per_class < 1) throw std::invalid_argument("config: split_per_class must be >= 1");
    if (!citation.empty() && citation != "cora" && citation != "tiny")
      throw std::invalid_argument("config: unknown citation bundle '" + citation + "'");
    int sources = (!dataset_path.empty()) + (!citation.empty()) + synth.has_value();
    if (sources > 1) throw std::invalid_argument("config: choose one of dataset/citation/synth");
    train.validate();
    lattice.validate();
    if (synth) synth->validate();
  }

  static ExperimentConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& doc, const std::vector<std::string>& known,
                                const std::string& where) {
  for (const auto& item : doc.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw std::invalid_argument("config: unknown key '" + item.key() + "' in " + where);
}

inline SynthConfig synth_from_json(const nlohmann::json& doc) {
  reject_unknown_keys(doc, {"nodes", "classes", "homophily", "degree", "mu", "sigma", "dim",
                            "seed", "symmetrize"},
                      "synth");
  SynthConfig cfg;
  cfg.nodes = doc.value("nodes", cfg.nodes);
  cfg.classes = doc.value("classes", cfg.classes);
  cfg.homophily = doc.value("homophily", cfg.homophily);
  cfg.degree = doc.value("degree", cfg.degree);
  cfg.mu = doc.value("mu", cfg.mu);
  cfg.sigma = doc.value("sigma", cfg.sigma);
  cfg.dim = doc.value("dim", cfg.dim);
  cfg.seed = doc.value("seed", cfg.seed);
  cfg.symmetrize = doc.value("symmetrize", cfg.symmetrize);
  return cfg;
}

inline TrainConfig train_from_json(const nlohmann::json& doc, TrainConfig cfg) {
  reject_unknown_keys(doc, {"hidden", "eta", "weight_decay", "lambda", "dropout", "epochs"},
                      "train");
  cfg.hidden = doc.value("hidden", cfg.hidden);
  cfg.eta = doc.value("eta", cfg.eta);
  cfg.weight_decay = doc.value("weight_decay", cfg.weight_decay);
  cfg.lambda = doc.value("lambda", cfg.lambda);
  cfg.dropout = doc.value("dropout", cfg.dropout);
  cfg.epochs = doc.value("epochs", cfg.epochs);
  return cfg;
}

inline LatticeConfig lattice_from_json(const nlohmann::json& doc, LatticeConfig cfg) {
  reject_unknown_keys(doc, {"homophily", "error", "classes", "degree", "seeds", "min_nodes"},
                      "lattice");
  if (doc.contains("homophily")) cfg.homophily = doc["homophily"].get<std::vector<double>>();
  if (doc.contains("error")) cfg.error = doc["error"].get<std::vector<double>>();
  if (doc.contains("classes")) cfg.classes = doc["classes"].get<std::vector<int>>();
  if (doc.contains("degree")) cfg.degree = doc["degree"].get<std::vector<int>>();
  cfg.seeds = doc.value("seeds", cfg.seeds);
  cfg.min_nodes = doc.value("min_nodes", cfg.min_nodes);
  return cfg;
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  detail::reject_unknown_keys(
      doc,
      {"command", "out_dir", "seed", "reps", "dataset", "citation", "synth", "regimes",
       "error_rate", "lambda_grid", "max_layers", "ablation_hops", "split_per_class", "train",
       "resolution", "integral_cells", "fault_injection", "lattice"},
      "top level");
  ExperimentConfig cfg;
  cfg.command = doc.value("command", cfg.command);
  cfg.out_dir = doc.value("out_dir", cfg.out_dir.string());
  cfg.seed = doc.value("seed", cfg.seed);
  cfg.reps = doc.value("reps", cfg.reps);
  cfg.dataset_path = doc.value("dataset", cfg.dataset_path);
  cfg.citation = doc.value("citation", cfg.citation);
  if (doc.contains("synth")) cfg.synth = detail::synth_from_json(doc["synth"]);
  if (doc.contains("regimes")) {
    cfg.regimes.clear();
    for (const auto& name : doc["regimes"])
      cfg.regimes.push_back(regime_from_string(name.get<std::string>()));
  }
  cfg.error_rate = doc.value("error_rate", cfg.error_rate);
  if (doc.contains("lambda_grid")) cfg.lambda_grid = doc["lambda_grid"].get<std::vector<double>>();
  cfg.max_layers = doc.value("max_layers", cfg.max_layers);
  cfg.ablation_hops = doc.value("ablation_hops", cfg.ablation_hops);
  cfg.split_per_class = doc.value("split_per_class", cfg.split_per_class);
  if (doc.contains("train")) cfg.train = detail::train_from_json(doc["train"], cfg.train);
  cfg.resolution = doc.value("resolution", cfg.resolution);
  cfg.integral_cells = doc.value("integral_cells", cfg.integral_cells);
  cfg.fault_injection = doc.value("fault_injection", cfg.fault_injection);
  if (doc.contains("lattice")) cfg.lattice = detail::lattice_from_json(doc["lattice"], cfg.lattice);
  return cfg;
}

// The effective configuration, overrides included, as recorded in provenance.
inline nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json doc;
  doc["command"] = command;
  doc["out_dir"] = out_dir.string();
  doc["seed"] = seed;
  doc["reps"] = reps;
  if (!dataset_path.empty()) doc["dataset"] = dataset_path;
  if (!citation.empty()) doc["citation"] = citation;
  if (synth) {
    doc["synth"] = {{"nodes", synth->nodes},     {"classes", synth->classes},
                    {"homophily", synth->homophily}, {"degree", synth->degree},
                    {"mu", synth->mu},           {"sigma", synth->sigma},
                    {"dim", synth->dim},         {"seed", synth->seed},
                    {"symmetrize", synth->symmetrize}};
  }
  doc["regimes"] = nlohmann::json::array();
  for (Regime r : regimes) doc["regimes"].push_back(to_string(r));
  doc["error_rate"] = error_rate;
  doc["lambda_grid"] = lambda_grid;
  doc["max_layers"] = max_layers;
  doc["ablation_hops"] = ablation_hops;
  doc["split_per_class"] = split_per_class;
  doc["train"] = {{"hidden", train.hidden},   {"eta", train.eta},
                  {"weight_decay", train.weight_decay}, {"lambda", train.lambda},
                  {"dropout", train.dropout}, {"epochs", train.epochs}};
  doc["resolution"] = resolution;
  doc["integral_cells"] = integral_cells;
  doc["fault_injection"] = fault_injection;
  doc["lattice"] = {{"homophily", lattice.homophily}, {"error", lattice.error},
                    {"classes", lattice.classes},     {"degree", lattice.degree},
                    {"seeds", lattice.seeds},         {"min_nodes", lattice.min_nodes}};
  return doc;
}

// --- shared machinery ------------------------------------------------------

namespace detail {

inline constexpr uint64_t kPropStream = 0x70726F70;  // "prop"

inline uint64_t rep_seed(uint64_t base, int rep) { return mix64(base, 1000 + rep); }
inline uint64_t synth_rep_seed(uint64_t base, int rep) { return mix64(base, 2000 + rep); }

inline std::filesystem::path command_dir(const ExperimentConfig& cfg, const char* command) {
  std::filesystem::path dir = cfg.out_dir / command;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
  return dir;
}

inline void write_provenance(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                             const char* command, const std::vector<uint64_t>& derived_seeds,
                             double wall_seconds) {
  nlohmann::json doc;
  doc["command"] = command;
  doc["version"] = kVersion;
  doc["seed"] = cfg.seed;
  doc["reps"] = cfg.reps;
  doc["config"] = cfg.to_json();
  doc["derived_seeds"] = derived_seeds;
  doc["wall_time_seconds"] = wall_seconds;
  std::ofstream out(dir / "provenance.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write provenance in " + dir.string());
  out << doc.dump(2) << "\n";
}

class WallClock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - begin_).count();
  }

 private:
  std::chrono::steady_clock::time_point begin_ = std::chrono::steady_clock::now();
};

// One bundle per repetition: fixed sources share a single instance, synthetic
// sources are regenerated with a per-repetition seed.
class BundleSeries {
 public:
  BundleSeries(const ExperimentConfig& cfg, int reps) {
    if (cfg.synth) {
      synth_ = *cfg.synth;
      base_seed_ = cfg.seed;
      count_ = reps;
    } else {
      if (!cfg.dataset_path.empty())
        fixed_ = load_bundle(cfg.dataset_path);
      else if (cfg.citation == "tiny")
        fixed_ = make_citation_bundle(tiny_fixture_config());
      else  // default: the cora-scale stand-in
        fixed_ = make_citation_bundle(cora_like_config(cfg.seed));
      count_ = reps;
    }
  }

  DatasetBundle make(int rep) const {
    if (!synth_) return *fixed_;
    SynthConfig sc = *synth_;
    sc.seed = synth_rep_seed(base_seed_, rep);
    Graph g = generate_graph(sc);
    Matrix x = generate_features(g, sc);
    Manifest manifest{"synth", g.num_nodes(), g.num_pairs(), x.cols(), g.num_classes()};
    return DatasetBundle{std::move(g), std::move(x), manifest};
  }

  bool regenerates() const { return synth_.has_value(); }
  int count() const { return count_; }

 private:
  std::optional<SynthConfig> synth_;
  std::optional<DatasetBundle> fixed_;
  uint64_t base_seed_ = 0;
  int count_ = 0;
};

struct RepMetrics {
  double val_acc = 0.0;
  double test_acc = 0.0;
  double dissonance = 0.0;
};

// One training run; the seed fully determines split, operator, initialization
// and dropout, so equal seeds give bit-identical metrics across commands.
inline RepMetrics run_training_rep(const CsrMatrix& x, const Graph& g, Regime regime,
                                   double lambda, double error_rate, uint64_t seed,
                                   const TrainConfig& base, int per_class = 20) {
  Split split = make_split(g.labels(), per_class, seed);
  PropagationMatrix p = build_propagation_matrix(
      g, regime, error_rate, mix64(seed, kPropStream + static_cast<uint64_t>(regime)));
  TrainConfig tc = base;
  tc.lambda = lambda;
  tc.seed = seed;
  TrainResult result = train(x, p, g.labels(), split, tc);
  Matrix probs = predict_probs(x, p, result.best_params);
  RepMetrics m;
  m.val_acc = accuracy(probs, g.labels(), split.val);
  m.test_acc = accuracy(probs, g.labels(), split.test);
  m.dissonance = mean_dissonance(probs, split.test);
  return m;
}

inline double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

inline double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

// Class probabilities from propagated features: softmax over the negative
// Euclidean distance to each class mean.
inline Matrix distance_probability_map(const Matrix& h, const Matrix& means) {
  if (h.cols() != means.cols())
    throw std::invalid_argument("distance_probability_map: dimension mismatch");
  Matrix probs(h.rows(), means.rows());
  std::vector<double> score(means.rows());
  for (int i = 0; i < h.rows(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < means.rows(); ++c) {
      double d2 = 0.0;
      for (int k = 0; k < h.cols(); ++k) {
        double diff = h(i, k) - means(c, k);
        d2 += diff * diff;
      }
      score[c] = -std::sqrt(d2);
      best = std::max(best, score[c]);
    }
    double sum = 0.0;
    for (int c = 0; c < means.rows(); ++c) sum += std::exp(score[c] - best);
    for (int c = 0; c < means.rows(); ++c) probs(i, c) = std::exp(score[c] - best) / sum;
  }
  return probs;
}

struct CheckRow {
  std::string check;
  std::string params;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline void write_check_csv(const std::filesystem::path& path, const std::vector<CheckRow>& rows) {
  CsvWriter csv({"check", "params", "observed", "expected", "tolerance", "pass"});
  for (const auto& row : rows)
    csv.cell(row.check).cell(row.params).cell(row.observed).cell(row.expected)
        .cell(row.tolerance).cell(row.pass);
  csv.write(path.string());
}

inline bool all_pass(const std::vector<CheckRow>& rows) {
  for (const auto& row : rows)
    if (!row.pass) return false;
  return true;
}

}  // namespace detail

// --- verify-theorems -------------------------------------------------------

// Monte Carlo check of the one-hop expectation formulas over the full
// parameter lattice, plus the surface-integral identities.  Exit 1 when any
// observed mean strays more than 3 standard errors from its formula.
inline int cmd_verify_theorems(const ExperimentConfig& cfg) {
  using namespace detail;
  WallClock clock;
  auto dir = command_dir(cfg, "verify-theorems");
  std::vector<CheckRow> rows;
  std::vector<uint64_t> bases;
  const LatticeConfig& lat = cfg.lattice;
  int check_index = 0;

  for (int classes : lat.classes) {
    int n = ((lat.min_nodes + classes - 1) / classes) * classes;
    std::vector<double> k{1.0, 0.0};
    std::vector<double> kp{-1.0 / (classes - 1.0), 0.0};
    for (double b : lat.homophily)
      for (double e : lat.error)
        for (int d : lat.degree)
          for (Regime regime : cfg.regimes) {
            double expected = 0.0;
            if (classes == 2) {
              expected = expected_coeff(regime, b, e, d, d);
            } else if (regime == Regime::vanilla) {
              expected = expected_vector_vanilla(b, k, kp, d, d)[0];
            } else {
              expected = expected_vector_multiclass(regime, b, e, k, kp, d, d)[0];
            }
            expected += cfg.fault_injection;

            uint64_t base = mix64(cfg.seed, 50000 + check_index++);
            bases.push_back(base);
            std::vector<double> coeffs;
            coeffs.reserve(lat.seeds);
            for (int s = 0; s < lat.seeds; ++s) {
              uint64_t seed_s = mix64(base, s);
              SynthConfig sc{.nodes = n, .classes = classes, .homophily = b, .degree = d,
                             .seed = seed_s};
              Graph g = generate_graph(sc);
              Matrix x = generate_features(g, sc);
              PropagationMatrix p =
                  build_propagation_matrix(g, regime, e, mix64(seed_s, kPropStream));
              Matrix h = propagate(x, p, 1);
              double sum = 0.0;
              int count = 0;
              for (int i = 0; i < g.num_nodes(); ++i)
                if (g.label(i) == 0) {
                  sum += h(i, 0);
                  ++count;
                }
              coeffs.push_back(sum / count);
            }
            double mc = mean_of(coeffs);
            double se = sample_std(coeffs) / std::sqrt(static_cast<double>(lat.seeds));
            double tol = std::max(3.0 * se, 1e-9);
            CheckRow row;
            row.check = "one_hop_coefficient";
            row.params = std::string(to_string(regime)) + " C=" + std::to_string(classes) +
                         " b=" + format_double(b) + " e=" + format_double(e) +
                         " d=" + std::to_string(d);
            row.observed = mc;
            row.expected = expected;
            row.tolerance = tol;
            row.pass = std::abs(mc - expected) <= tol;
            rows.push_back(row);
          }
  }

  // surface-integral identities (the aligned surface integrates to -1/2,
  // twice checked against an independent quadrature in the unit tests)
  auto integral_row = [&](ZCase zc, double target) {
    CheckRow row;
    row.check = "surface_integral";
    row.params = to_string(zc);
    row.observed = z_surface_integral(zc, cfg.integral_cells);
    row.expected = target + cfg.fault_injection;
    row.tolerance = 1e-6;
    row.pass = std::abs(row.observed - row.expected) <= row.tolerance;
    rows.push_back(row);
  };
  integral_row(ZCase::binary, 0.0);
  integral_row(ZCase::multi_opposed, 0.0);
  integral_row(ZCase::multi_aligned, -0.5);

  // the opposed-cross-mean surface must coincide with the binary surface
  {
    ZSurface a = z_surface(ZCase::binary, cfg.resolution);
    ZSurface o = z_surface(ZCase::multi_opposed, cfg.resolution);
    double worst = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i)
      worst = std::max(worst, std::abs(a.values[i] - o.values[i]));
    CheckRow row;
    row.check = "opposed_equals_binary";
    row.params = "resolution=" + std::to_string(cfg.resolution);
    row.observed = worst;
    row.expected = 0.0;
    row.tolerance = 1e-12;
    row.pass = worst <= row.tolerance;
    rows.push_back(row);
  }

  write_check_csv(dir / "report.csv", rows);
  write_provenance(dir, cfg, "verify-theorems", bases, clock.seconds());
  return all_pass(rows) ? 0 : 1;
}

// --- fig1: three-regime training ------------------------------------------

inline int cmd_fig1(const ExperimentConfig& cfg) {
  using namespace detail;
  WallClock clock;
  auto dir = command_dir(cfg, "fig1");
  BundleSeries series(cfg, cfg.reps);

  CsvWriter summary({"regime", "reps", "acc_mean", "acc_std", "diss_mean"});
  CsvWriter details({"regime", "rep", "seed", "val_acc", "test_acc", "dissonance"});
  std::vector<uint64_t> seeds;
  SvgChart chart("test accuracy by repetition", "repetition", "test accuracy");

  for (Regime regime : cfg.regimes) {
    std::vector<double> accs, disses, xs;
    for (int rep = 0; rep < cfg.reps; ++rep) {
      uint64_t seed = rep_seed(cfg.seed, rep);
      if (regime == cfg.regimes.front()) seeds.push_back(seed);
      DatasetBundle bundle = series.make(rep);
      CsrMatrix x = CsrMatrix::from_dense(bundle.features);
      RepMetrics m = run_training_rep(x, bundle.graph, regime, cfg.train.lambda, cfg.error_rate,
                                      seed, cfg.train, cfg.split_per_class);
      details.cell(to_string(regime)).cell(rep).cell(std::to_string(seed)).cell(m.val_acc)
          .cell(m.test_acc).cell(m.dissonance);
      accs.push_back(m.test_acc);
      disses.push_back(m.dissonance);
      xs.push_back(rep);
    }
    summary.cell(to_string(regime)).cell(cfg.reps).cell(mean_of(accs))
        .cell(cfg.reps >= 2 ? format_double(sample_std(accs)) : std::string("n/a"))
        .cell(mean_of(disses));
    chart.add_series(to_string(regime), xs, accs);
  }

  summary.write((dir / "report.csv").string());
  details.write((dir / "details.csv").string());
  chart.write((dir / "accuracy.svg").string());
  write_provenance(dir, cfg, "fig1", seeds, clock.seconds());
  return 0;
}

// --- zsurface --------------------------------------------------------------

inline int cmd_zsurface(const ExperimentConfig& cfg) {
  using namespace detail;
  WallClock clock;
  auto dir = command_dir(cfg, "zsurface");
  std::vector<CheckRow> rows;

  const ZCase cases[] = {ZCase::binary, ZCase::multi_opposed, ZCase::multi_aligned};
  for (ZCase zc : cases) {
    ZSurface surface = z_surface(zc, cfg.resolution);
    CsvWriter csv({"e", "b", "z"});
    for (int ie = 0; ie < cfg.resolution; ++ie)
      for (int ib = 0; ib < cfg.resolution; ++ib)
        csv.cell(surface.coord(ie)).cell(surface.coord(ib)).cell(surface.value(ie, ib));
    std::string stem = std::string("surface_") + to_string(zc);
    csv.write((dir / (stem + ".csv")).string());

    Matrix grid(cfg.resolution, cfg.resolution);  // rows: b (up), cols: e (right)
    for (int ib = 0; ib < cfg.resolution; ++ib)
      for (int ie = 0; ie < cfg.resolution; ++ie) grid(ib, ie) = surface.value(ie, ib);
    write_heatmap_svg((dir / (stem + ".svg")).string(), std::string("Z ") + to_string(zc), grid);
  }

  ZSurface binary = z_surface(ZCase::binary, cfg.resolution);
  auto corner = [&](const char* name, double value, double target) {
    rows.push_back(CheckRow{"corner", name, value, target, 0.0, value == target});
  };
  corner("binary e=0 b=0", binary.value(0, 0), 1.0);
  corner("binary e=1 b=1", binary.value(cfg.resolution - 1, cfg.resolution - 1), -1.0);

  {
    double worst = 0.0;
    for (int ie = 0; ie < cfg.resolution; ++ie)
      for (int ib = 0; ib < cfg.resolution; ++ib)
        worst = std::max(worst, std::abs(binary.value(ie, ib) - binary.value(ib, ie)));
    rows.push_back(
        CheckRow{"binary_symmetry", "swap e and b", worst, 0.0, 1e-12, worst <= 1e-12});
  }
  {
    int violations = 0;
    for (int ie = 0; ie < cfg.resolution; ++ie)
      for (int ib = 0; ib < cfg.resolution; ++ib) {
        double e = binary.coord(ie), b = binary.coord(ib);
        double z = binary.value(ie, ib);
        if (e + b < 1.0 && !(z > 0.0)) ++violations;
        if (e + b > 1.0 && !(z < 0.0)) ++violations;
      }
    rows.push_back(CheckRow{"binary_sign_pattern", "z > 0 iff e + b < 1",
                            static_cast<double>(violations), 0.0, 0.0, violations == 0});
  }
  {
    ZSurface opposed = z_surface(ZCase::multi_opposed, cfg.resolution);
    double worst = 0.0;
    for (size_t i = 0; i < opposed.values.size(); ++i)
      worst = std::max(worst, std::abs(opposed.values[i] - binary.values[i]));
    rows.push_back(
        CheckRow{"opposed_equals_binary", "pointwise", worst, 0.0, 1e-12, worst <= 1e-12});
  }
  {
    double observed = z_surface_integral(ZCase::binary, cfg.integral_cells);
    rows.push_back(CheckRow{"integral", "binary", observed, 0.0, 1e-6,
                            std::abs(observed) <= 1e-6});
    double opposed = z_surface_integral(ZCase::multi_opposed, cfg.integral_cells);
    rows.push_back(CheckRow{"integral", "multi_opposed", opposed, 0.0, 1e-6,
                            std::abs(opposed) <= 1e-6});
    // the aligned surface truly integrates to -1/2 (see the propagation unit
    // tests, which confirm the value with two independent quadratures)
    double aligned = z_surface_integral(ZCase::multi_aligned, cfg.integral_cells);
    rows.push_back(CheckRow{"integral", "multi_aligned", aligned, -0.5, 1e-6,
                            std::abs(aligned + 0.5) <= 1e-6});
  }

  write_check_csv(dir / "report.csv", rows);
  write_provenance(dir, cfg, "zsurface", {}, clock.seconds());
  return all_pass(rows) ? 0 : 1;
}

// --- dissonance vs depth ---------------------------------------------------

inline int cmd_dissonance_depth(const ExperimentConfig& cfg) {
  using namespace detail;
  WallClock clock;
  if (cfg.max_layers < 1) throw std::invalid_argument("dissonance-depth: max_layers must be >= 1");
  SynthConfig sc = cfg.synth.value_or(SynthConfig{.nodes = 1000, .classes = 5, .homophily = 0.2,
                                                  .degree = 10});
  auto dir = command_dir(cfg, "dissonance-depth");
  Matrix means = class_mean_matrix(sc.classes, sc.mu, sc.dim);
  std::vector<uint64_t> seeds;

  // diss[regime][layer] accumulated over repetitions
  std::vector<std::vector<double>> diss(cfg.regimes.size(),
                                        std::vector<double>(cfg.max_layers + 1, 0.0));
  for (int rep = 0; rep < cfg.reps; ++rep) {
    uint64_t seed = synth_rep_seed(cfg.seed, rep);
    seeds.push_back(seed);
    SynthConfig rep_cfg = sc;
    rep_cfg.seed = seed;
    Graph g = generate_graph(rep_cfg);
    Matrix x = generate_features(g, rep_cfg);
    std::vector<int> all(g.num_nodes());
    for (int i = 0; i < g.num_nodes(); ++i) all[i] = i;
    for (size_t r = 0; r < cfg.regimes.size(); ++r) {
      PropagationMatrix p = build_propagation_matrix(
          g, cfg.regimes[r], cfg.error_rate,
          mix64(seed, kPropStream + static_cast<uint64_t>(cfg.regimes[r])));
      Matrix h = x;
      for (int layer = 0; layer <= cfg.max_layers; ++layer) {
        if (layer > 0) h = p.weights().multiply(h);
        Matrix probs = distance_probability_map(h, means);
        diss[r][layer] += mean_dissonance(probs, all) / cfg.reps;
      }
    }
  }

  CsvWriter csv({"regime", "layers", "diss_mean"});
  SvgChart chart("dissonance by propagation depth", "layers", "mean dissonance");
  for (size_t r = 0; r < cfg.regimes.size(); ++r) {
    std::vector<double> xs;
    for (int layer = 0; layer <= cfg.max_layers; ++layer) {
      csv.cell(to_string(cfg.regimes[r])).cell(layer).cell(diss[r][layer]);
      xs.push_back(layer);
    }
    chart.add_series(to_string(cfg.regimes[r]), xs, diss[r]);
  }
  csv.write((dir / "report.csv").string());
  chart.write((dir / "dissonance.svg").string());

  // depth 0 applies no propagation, so the regimes must agree exactly there
  std::vector<CheckRow> rows;
  double worst = 0.0;
  for (size_t r = 1; r < cfg.regimes.size(); ++r)
    worst = std::max(worst, std::abs(diss[r][0] - diss[0][0]));
  rows.push_back(CheckRow{"depth_zero_identical", "all regimes", worst, 0.0, 0.0, worst == 0.0});
  write_check_csv(dir / "checks.csv", rows);
  write_provenance(dir, cfg, "dissonance-depth", seeds, clock.seconds());
  return all_pass(rows) ? 0 : 1;
}

// --- class ablation --------------------------------------------------------

namespace detail {

struct AblatedView {
  Graph graph;
  Matrix features;
};

// Keep only nodes with label < classes_kept, renumbering nodes but keeping
// label values (they already lie below the cut).
inline AblatedView ablate_to(const Graph& g, const Matrix& features, int classes_kept) {
  std::vector<int> new_index(g.num_nodes(), -1);
  int kept = 0;
  for (int i = 0; i < g.num_nodes(); ++i)
    if (g.label(i) < classes_kept) new_index[i] = kept++;
  std::vector<int> labels(kept);
  Matrix sub(kept, features.cols());
  for (int i = 0; i < g.num_nodes(); ++i)
    if (new_index[i] >= 0) {
      labels[new_index[i]] = g.label(i);
      for (int c = 0; c < features.cols(); ++c) sub(new_index[i], c) = features(i, c);
    }
  std::vector<std::pair<int, int>> pairs;
  for (auto [a, b] : g.pairs())
    if (new_index[a] >= 0 && new_index[b] >= 0) pairs.emplace_back(new_index[a], new_index[b]);
  return AblatedView{Graph::undirected(kept, std::move(pairs), std::move(labels), classes_kept),
                     std::move(sub)};
}

}  // namespace detail

// Iteratively removes the highest class and reports the untrained dissonance
// of sign-flip vs drop propagation on what remains.
inline int cmd_class_ablation(const ExperimentConfig& cfg) {
  using namespace detail;
  WallClock clock;
  auto dir = command_dir(cfg, "class-ablation");

  SynthConfig sc = cfg.synth.value_or(SynthConfig{.nodes = 1050, .classes = 7, .homophily = 0.7,
                                                  .degree = 10, .symmetrize = true});
  if (cfg.synth && !cfg.synth->symmetrize)
    throw std::invalid_argument("class-ablation: synth graphs must be symmetrized (undirected)");
  int total_classes = sc.classes;
  if (total_classes < 3) throw std::invalid_argument("class-ablation: need >= 3 classes");

  Matrix means_full = class_mean_matrix(total_classes, sc.mu, sc.dim);
  const Regime pair[] = {Regime::signed_edges, Regime::zero_weight};

  // rows indexed by classes remaining, then regime
  std::vector<std::vector<double>> diss(total_classes + 1, std::vector<double>(2, 0.0));
  std::vector<std::vector<double>> nodes(total_classes + 1, std::vector<double>(2, 0.0));
  std::vector<uint64_t> seeds;
  for (int rep = 0; rep < cfg.reps; ++rep) {
    uint64_t seed = synth_rep_seed(cfg.seed, rep);
    seeds.push_back(seed);
    SynthConfig rep_cfg = sc;
    rep_cfg.seed = seed;
    Graph g = generate_graph(rep_cfg);
    Matrix x = generate_features(g, rep_cfg);
    for (int classes_kept = total_classes; classes_kept >= 2; --classes_kept) {
      AblatedView view = ablate_to(g, x, classes_kept);
      Matrix means(classes_kept, means_full.cols());
      for (int c = 0; c < classes_kept; ++c)
        for (int k = 0; k < means_full.cols(); ++k) means(c, k) = means_full(c, k);
      std::vector<int> all(view.graph.num_nodes());
      for (int i = 0; i < view.graph.num_nodes(); ++i) all[i] = i;
      for (int r = 0; r < 2; ++r) {
        PropagationMatrix p = build_propagation_matrix(
            view.graph, pair[r], cfg.error_rate,
            mix64(seed, kPropStream + static_cast<uint64_t>(pair[r])));
        Matrix h = propagate(view.features, p, cfg.ablation_hops);
        Matrix probs = distance_probability_map(h, means);
        diss[classes_kept][r] += mean_dissonance(probs, all) / cfg.reps;
        nodes[classes_kept][r] = view.graph.num_nodes();
      }
    }
  }

  CsvWriter csv({"classes", "regime", "nodes", "diss_mean"});
  SvgChart chart("dissonance by class count", "classes remaining", "mean dissonance");
  for (int r = 0; r < 2; ++r) {
    std::vector<double> xs, ys;
    for (int classes_kept = total_classes; classes_kept >= 2; --classes_kept) {
      csv.cell(classes_kept).cell(to_string(pair[r]))
          .cell(static_cast<int>(nodes[classes_kept][r])).cell(diss[classes_kept][r]);
      xs.push_back(classes_kept);
      ys.push_back(diss[classes_kept][r]);
    }
    chart.add_series(to_string(pair[r]), xs, ys);
  }
  csv.write((dir / "report.csv").string());
  chart.write((dir / "dissonance.svg").string());

  // balanced generator: each removal drops exactly n/C nodes
  std::vector<CheckRow> rows;
  int per = sc.nodes / sc.classes;
  bool sizes_ok = true;
  for (int classes_kept = total_classes; classes_kept >= 2; --classes_kept)
    if (static_cast<int>(nodes[classes_kept][0]) != per * classes_kept) sizes_ok = false;
  rows.push_back(CheckRow{"ablation_node_counts", "balanced blocks",
                          sizes_ok ? 1.0 : 0.0, 1.0, 0.0, sizes_ok});
  write_check_csv(dir / "checks.csv", rows);
  write_provenance(dir, cfg, "class-ablation", seeds, clock.seconds());
  return all_pass(rows) ? 0 : 1;
}

// --- lambda sweep ----------------------------------------------------------

inline int cmd_lambda_sweep(const ExperimentConfig& cfg) {
  using namespace detail;
  WallClock clock;
  auto dir = command_dir(cfg, "lambda-sweep");
  BundleSeries series(cfg, cfg.reps);

  struct LambdaStats {
    double lambda = 0.0;
    double val_mean = 0.0;
    double test_mean = 0.0;
    double test_std = 0.0;
    double diss_mean = 0.0;
  };
  std::vector<LambdaStats> stats;
  std::vector<uint64_t> seeds;

  for (double lambda : cfg.lambda_grid) {
    std::vector<double> vals, tests, disses;
    for (int rep = 0; rep < cfg.reps; ++rep) {
      uint64_t seed = rep_seed(cfg.seed, rep);
      if (lambda == cfg.lambda_grid.front()) seeds.push_back(seed);
      DatasetBundle bundle = series.make(rep);
      CsrMatrix x = CsrMatrix::from_dense(bundle.features);
      RepMetrics m = run_training_rep(x, bundle.graph, Regime::vanilla, lambda, cfg.error_rate,
                                      seed, cfg.train, cfg.split_per_class);
      vals.push_back(m.val_acc);
      tests.push_back(m.test_acc);
      disses.push_back(m.dissonance);
    }
    stats.push_back(LambdaStats{lambda, mean_of(vals), mean_of(tests), sample_std(tests),
                                mean_of(disses)});
  }

  size_t best = 0;
  for (size_t i = 1; i < stats.size(); ++i)
    if (stats[i].val_mean > stats[best].val_mean) best = i;

  CsvWriter csv({"lambda", "reps", "val_mean", "test_mean", "test_std", "diss_mean", "selected"});
  SvgChart chart("calibration weight sweep", "lambda", "mean");
  std::vector<double> xs, acc_ys, diss_ys;
  for (size_t i = 0; i < stats.size(); ++i) {
    csv.cell(stats[i].lambda).cell(cfg.reps).cell(stats[i].val_mean).cell(stats[i].test_mean)
        .cell(cfg.reps >= 2 ? format_double(stats[i].test_std) : std::string("n/a"))
        .cell(stats[i].diss_mean).cell(i == best);
    xs.push_back(stats[i].lambda);
    acc_ys.push_back(stats[i].test_mean);
    diss_ys.push_back(stats[i].diss_mean);
  }
  chart.add_series("test accuracy", xs, acc_ys);
  chart.add_series("dissonance", xs, diss_ys);
  csv.write((dir / "report.csv").string());
  chart.write((dir / "sweep.svg").string());
  write_provenance(dir, cfg, "lambda-sweep", seeds, clock.seconds());
  return 0;
}

// --- dispatch --------------------------------------------------------------

inline int run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.command == "verify-theorems") return cmd_verify_theorems(cfg);
  if (cfg.command == "fig1") return cmd_fig1(cfg);
  if (cfg.command == "zsurface") return cmd_zsurface(cfg);
  if (cfg.command == "dissonance-depth") return cmd_dissonance_depth(cfg);
  if (cfg.command == "class-ablation") return cmd_class_ablation(cfg);
  if (cfg.command == "lambda-sweep") return cmd_lambda_sweep(cfg);
  throw std::invalid_argument("unknown command '" + cfg.command + "'");
}

}  // namespace hetsign
