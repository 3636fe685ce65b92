// stokesim: polarization Bell-test simulator for optical fields of undefined
// photon number. Every subcommand reproduces one sweep as a CSV table with
// `#`-prefixed metadata, deterministic for a fixed configuration.

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stokesim/bell_engine.hpp"
#include "stokesim/csv.hpp"
#include "stokesim/parallel.hpp"

namespace {

using namespace stokesim;

constexpr const char* kVersion = "0.1.0";
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct CommonOpts {
  double gamma_min = 0.0;
  double gamma_max = 2.5;
  double gamma_step = 0.025;
  int cutoff = 150;
  double eta = 1.0;
  double q = 1.0;
  std::string kind = "sign";
  std::string out;
  int jobs = 1;
  double tol = 1e-4;
  std::string config_path;
};

ObservableKind parse_kind(const std::string& name) {
  if (name == "sign") return ObservableKind::Sign;
  if (name == "normalized") return ObservableKind::Normalized;
  if (name == "projector") return ObservableKind::Projector;
  if (name == "rate") return ObservableKind::Rate;
  throw CLI::ValidationError("--kind", "unknown observable kind: " + name);
}

std::vector<double> gamma_grid(const CommonOpts& o) {
  if (o.gamma_step <= 0.0) throw CLI::ValidationError("--gamma-step", "step must be positive");
  if (o.gamma_max < o.gamma_min)
    throw CLI::ValidationError("--gamma-max", "range must be non-empty");
  std::vector<double> grid;
  const int count = static_cast<int>(std::floor((o.gamma_max - o.gamma_min) / o.gamma_step + 1e-9)) + 1;
  grid.reserve(count);
  for (int i = 0; i < count; ++i) grid.push_back(o.gamma_min + i * o.gamma_step);
  return grid;
}

std::string config_line(const CommonOpts& o) {
  std::ostringstream os;
  os << "config: gamma-min=" << o.gamma_min << " gamma-max=" << o.gamma_max
     << " gamma-step=" << o.gamma_step << " cutoff=" << o.cutoff << " eta=" << o.eta
     << " q=" << o.q << " kind=" << o.kind << " jobs=" << o.jobs << " tol=" << o.tol;
  return os.str();
}

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--gamma-min", o.gamma_min, "sweep start");
  cmd->add_option("--gamma-max", o.gamma_max, "sweep end (inclusive)");
  cmd->add_option("--gamma-step", o.gamma_step, "sweep step");
  cmd->add_option("--cutoff", o.cutoff, "largest per-beam photon total kept")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--eta", o.eta, "detector efficiency")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--q", o.q, "signal fraction of the white-noise mixture")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--kind", o.kind, "observable kind")
      ->check(CLI::IsMember({"sign", "normalized", "projector", "rate"}));
  cmd->add_option("--out", o.out, "output file (stdout when omitted)");
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", o.tol, "root-finding tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--config", o.config_path, "key=value settings file (flags take precedence)");
}

// Plain key=value settings, one per line, # comments. A key is applied only
// when the matching flag was not given on the command line.
void apply_config_file(CLI::App* cmd, CommonOpts& o) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in) throw std::runtime_error("cannot read config file: " + o.config_path);

  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(o.config_path + ":" + std::to_string(lineno) +
                               ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const CLI::Option* flag = cmd->get_option_no_throw("--" + key);
    if (!flag)
      throw std::runtime_error(o.config_path + ":" + std::to_string(lineno) +
                               ": unknown key '" + key + "'");
    if (flag->count() > 0) continue;  // explicit flag wins

    try {
      if (key == "gamma-min") o.gamma_min = std::stod(value);
      else if (key == "gamma-max") o.gamma_max = std::stod(value);
      else if (key == "gamma-step") o.gamma_step = std::stod(value);
      else if (key == "cutoff") o.cutoff = std::stoi(value);
      else if (key == "eta") o.eta = std::stod(value);
      else if (key == "q") o.q = std::stod(value);
      else if (key == "kind") o.kind = value;
      else if (key == "out") o.out = value;
      else if (key == "jobs") o.jobs = std::stoi(value);
      else if (key == "tol") o.tol = std::stod(value);
      else
        throw std::runtime_error("key '" + key + "' cannot be set from a config file");
    } catch (const std::invalid_argument&) {
      throw std::runtime_error(o.config_path + ":" + std::to_string(lineno) +
                               ": bad value for '" + key + "'");
    }
  }
  if (o.kind != "sign" && o.kind != "normalized" && o.kind != "projector" && o.kind != "rate")
    throw std::runtime_error("config: unknown observable kind: " + o.kind);
  if (!(o.eta >= 0.0 && o.eta <= 1.0) || !(o.q >= 0.0 && o.q <= 1.0) || o.cutoff < 1 ||
      o.jobs < 1 || o.tol <= 0.0)
    throw std::runtime_error("config: value out of range");
}

double weighted_lhs(const std::vector<double>& values, const BsvWeights& w,
                    bool absolute = true) {
  double s = 0.0;
  for (std::size_t n = 0; n < values.size(); ++n) s += w.w[n] * values[n];
  return absolute ? std::abs(s) : s;
}

csv::Table base_table(const std::string& command, const CommonOpts& o) {
  csv::Table t;
  t.add_meta(std::string("stokesim ") + kVersion);
  t.add_meta("command: " + command);
  t.add_meta(config_line(o));
  return t;
}

// Four-family noise ladder used when --q < 1.
std::vector<double> noise_combos(const SettingsQuad& quad, ObservableKind kind,
                                 const CommonOpts& o) {
  std::vector<double> avg(o.cutoff + 1, 0.0);
  for (BellFamily fam : {BellFamily::PsiMinus, BellFamily::PsiPlus, BellFamily::PhiMinus,
                         BellFamily::PhiPlus}) {
    const QuadProbCache cache(fam, quad, o.cutoff, o.jobs);
    const std::vector<double> combos = cache.chsh_combos(kind, o.eta);
    for (int n = 0; n <= o.cutoff; ++n) avg[n] += 0.25 * combos[n];
  }
  return avg;
}

int cmd_chsh_curve(const CommonOpts& o) {
  const SettingsQuad quad = SettingsQuad::defaults();
  const QuadProbCache cache(BellFamily::PsiMinus, quad, o.cutoff, o.jobs);
  const std::vector<double> sign = cache.chsh_combos(ObservableKind::Sign, o.eta);
  const std::vector<double> norm = cache.chsh_combos(ObservableKind::Normalized, o.eta);
  std::vector<double> noise_sign, noise_norm;
  if (o.q < 1.0) {
    noise_sign = noise_combos(quad, ObservableKind::Sign, o);
    noise_norm = noise_combos(quad, ObservableKind::Normalized, o);
  }

  csv::Table t = base_table("chsh-curve", o);
  t.columns = {"gamma", "lhs_sign", "lhs_normalized", "vacuum_term"};
  const std::vector<double> grid = gamma_grid(o);
  for (double gamma : grid) {
    const BsvWeights w = bsv_weights(gamma, o.cutoff);
    double lhs_s = 0.0, lhs_n = 0.0;
    if (o.q < 1.0) {
      lhs_s = std::abs(noise_mixture_lhs(weighted_lhs(sign, w, false),
                                         weighted_lhs(noise_sign, w, false), o.q));
      lhs_n = std::abs(noise_mixture_lhs(weighted_lhs(norm, w, false),
                                         weighted_lhs(noise_norm, w, false), o.q));
    } else {
      lhs_s = weighted_lhs(sign, w);
      lhs_n = weighted_lhs(norm, w);
    }
    t.add_row({gamma, lhs_s, lhs_n, vacuum_term_chsh(gamma)});
  }
  t.add_meta("tail-mass@gamma-max=" +
             csv::format_value(bsv_weights(grid.back(), o.cutoff).tail_mass));
  csv::write_to(o.out, t);
  return 0;
}

int cmd_nonvacuum_curve(const CommonOpts& o, int cutoff_b) {
  const SettingsQuad quad = SettingsQuad::defaults();
  const ObservableKind kind = parse_kind(o.kind);
  const QuadProbCache cache(BellFamily::PsiMinus, quad, o.cutoff, o.jobs);
  const std::vector<double> combos = cache.chsh_combos(kind, o.eta);
  const std::vector<double> combos_b(combos.begin(),
                                     combos.begin() + std::min(o.cutoff, cutoff_b) + 1);

  csv::Table t = base_table("nonvacuum-curve", o);
  t.add_meta("cutoff-a=" + std::to_string(o.cutoff) + " cutoff-b=" + std::to_string(cutoff_b));
  t.columns = {"gamma", "lhs_nv_cutoff_a", "lhs_nv_cutoff_b", "asymptotic_bound"};
  for (double gamma : gamma_grid(o)) {
    auto nonvacuum = [&](const std::vector<double>& v, int cut) {
      const BsvWeights w = bsv_weights(gamma, cut);
      double s = 0.0;
      for (int n = 1; n <= cut; ++n) s += w.w[n] * v[n];
      return s;
    };
    t.add_row({gamma, nonvacuum(combos, o.cutoff), nonvacuum(combos_b, cutoff_b),
               asymptotic_bound(gamma)});
  }
  csv::write_to(o.out, t);
  return 0;
}

int cmd_per_sector(const CommonOpts& o, int n_max) {
  const SettingsQuad quad = SettingsQuad::defaults();
  const QuadProbCache cache(BellFamily::PsiMinus, quad, n_max, o.jobs);
  const std::vector<double> chsh_sign = cache.chsh_combos(ObservableKind::Sign, o.eta);
  const std::vector<double> chsh_norm = cache.chsh_combos(ObservableKind::Normalized, o.eta);
  const std::vector<double> ch_proj = cache.ch_values(ObservableKind::Projector, o.eta);

  csv::Table t = base_table("per-sector", o);
  t.add_meta("n-max=" + std::to_string(n_max));
  t.columns = {"n", "odd", "chsh_sign", "chsh_normalized", "ch_projector"};
  for (int n = 1; n <= n_max; ++n)
    t.add_row({double(n), double(n % 2), chsh_sign[n], chsh_norm[n], ch_proj[n]});
  csv::write_to(o.out, t);
  return 0;
}

int cmd_block_average(const CommonOpts& o, int blocks) {
  const SettingsQuad quad = SettingsQuad::defaults();
  const ObservableKind kind = parse_kind(o.kind);
  const QuadProbCache cache(BellFamily::PsiMinus, quad, 8 * blocks, o.jobs);
  const std::vector<double> combos = cache.chsh_combos(kind, o.eta);

  csv::Table t = base_table("block-average", o);
  t.add_meta("blocks=" + std::to_string(blocks));
  t.columns = {"N", "lhs_gamma_1", "lhs_gamma_2", "lhs_gamma_3", "lhs_gamma_inf"};
  const double inf = std::numeric_limits<double>::infinity();
  for (int N = 1; N <= blocks; ++N)
    t.add_row({double(N), block_average_from_combos(N, 1.0, combos),
               block_average_from_combos(N, 2.0, combos),
               block_average_from_combos(N, 3.0, combos),
               block_average_from_combos(N, inf, combos)});
  csv::write_to(o.out, t);
  return 0;
}

int cmd_critical_efficiency(const CommonOpts& o, const std::string& inequality,
                            bool cutoff_given, bool gamma_max_given) {
  const SettingsQuad quad = SettingsQuad::defaults();
  CommonOpts opts = o;
  const bool mermin = inequality == "mermin";
  if (mermin && !cutoff_given) opts.cutoff = 60;
  if (mermin && !gamma_max_given) opts.gamma_max = 0.35;
  const RootFindOptions rf{opts.tol, 0.05};

  csv::Table t = base_table("critical-efficiency", opts);
  t.add_meta("inequality=" + inequality);
  t.columns = {"gamma", "eta_c_sign", "eta_c_normalized"};
  const std::vector<double> grid = gamma_grid(opts);
  std::vector<std::array<double, 2>> rows(grid.size());

  if (mermin) {
    parallel_for(0, static_cast<int>(grid.size()), opts.jobs, [&](int i) {
      const MerminProbCache cache(bghz_coefficients(grid[i], opts.cutoff), 1);
      rows[i] = {critical_efficiency_mermin(cache, ObservableKind::Sign, rf).value_or(kNan),
                 critical_efficiency_mermin(cache, ObservableKind::Normalized, rf)
                     .value_or(kNan)};
    });
  } else if (inequality == "chsh") {
    const QuadProbCache cache(BellFamily::PsiMinus, quad, opts.cutoff, opts.jobs);
    parallel_for(0, static_cast<int>(grid.size()), opts.jobs, [&](int i) {
      const BsvWeights w = bsv_weights(grid[i], opts.cutoff);
      rows[i] = {critical_efficiency_chsh(cache, w, ObservableKind::Sign, rf).value_or(kNan),
                 critical_efficiency_chsh(cache, w, ObservableKind::Normalized, rf)
                     .value_or(kNan)};
    });
  } else {
    throw CLI::ValidationError("--inequality", "chsh or mermin");
  }

  for (std::size_t i = 0; i < grid.size(); ++i)
    t.add_row({grid[i], rows[i][0], rows[i][1]});
  csv::write_to(opts.out, t);
  return 0;
}

int cmd_critical_noise(const CommonOpts& o, std::optional<double> noise_gamma) {
  const SettingsQuad quad = SettingsQuad::defaults();
  csv::Table t = base_table("critical-noise", o);
  if (noise_gamma) t.add_meta("noise-gamma=" + csv::format_value(*noise_gamma));
  t.columns = {"gamma", "q_c_sign", "q_c_normalized"};

  // Sector combos per family are gamma independent; assemble them once.
  std::vector<std::vector<double>> fam_sign, fam_norm;
  for (BellFamily fam : {BellFamily::PsiMinus, BellFamily::PsiPlus, BellFamily::PhiMinus,
                         BellFamily::PhiPlus}) {
    const QuadProbCache cache(fam, quad, o.cutoff, o.jobs);
    fam_sign.push_back(cache.chsh_combos(ObservableKind::Sign, o.eta));
    fam_norm.push_back(cache.chsh_combos(ObservableKind::Normalized, o.eta));
  }
  auto qc_at = [&](double gamma, const std::vector<std::vector<double>>& fams) {
    const BsvWeights ws = bsv_weights(gamma, o.cutoff);
    const BsvWeights wn = bsv_weights(noise_gamma.value_or(gamma), o.cutoff);
    const double signal = weighted_lhs(fams[0], ws, false);
    double noise = 0.0;
    for (const auto& f : fams) noise += 0.25 * weighted_lhs(f, wn, false);
    if (signal <= 2.0) return kNan;
    return std::clamp((2.0 - noise) / (signal - noise), 0.0, 1.0);
  };
  for (double gamma : gamma_grid(o))
    t.add_row({gamma, qc_at(gamma, fam_sign), qc_at(gamma, fam_norm)});
  csv::write_to(o.out, t);
  return 0;
}

int cmd_ch_curve(const CommonOpts& o) {
  const SettingsQuad quad = SettingsQuad::defaults();
  const QuadProbCache cache(BellFamily::PsiMinus, quad, o.cutoff, o.jobs);
  const std::vector<double> proj = cache.ch_values(ObservableKind::Projector, o.eta);
  const std::vector<double> rate = cache.ch_values(ObservableKind::Rate, o.eta);

  csv::Table t = base_table("ch-curve", o);
  t.add_meta("classical window [-1, 0]; positive values violate the upper bound");
  t.columns = {"gamma", "lhs_projector", "lhs_rate"};
  for (double gamma : gamma_grid(o)) {
    const BsvWeights w = bsv_weights(gamma, o.cutoff);
    t.add_row({gamma, weighted_lhs(proj, w, false), weighted_lhs(rate, w, false)});
  }
  csv::write_to(o.out, t);
  return 0;
}

int cmd_mermin_curve(const CommonOpts& o) {
  csv::Table t = base_table("mermin-curve", o);
  t.columns = {"gamma", "lhs_sign", "lhs_normalized", "leakage"};
  const std::vector<double> grid = gamma_grid(o);
  std::vector<std::array<double, 3>> rows(grid.size());
  parallel_for(0, static_cast<int>(grid.size()), o.jobs, [&](int i) {
    const BghzCoefficients coeffs = bghz_coefficients(grid[i], o.cutoff);
    const MerminProbCache cache(coeffs, 1);
    rows[i] = {cache.lhs(ObservableKind::Sign, o.eta).lhs,
               cache.lhs(ObservableKind::Normalized, o.eta).lhs, coeffs.leakage};
  });
  double max_leak = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    max_leak = std::max(max_leak, rows[i][2]);
    t.add_row({grid[i], rows[i][0], rows[i][1], rows[i][2]});
  }
  t.add_meta("max-leakage=" + csv::format_value(max_leak));
  csv::write_to(o.out, t);
  return 0;
}

int cmd_norm_demo(const CommonOpts& o) {
  csv::Table t = base_table("norm-demo", o);
  t.add_meta("sign-Stokes vector of |3,0> after an SO(2) rotation of the state");
  t.columns = {"angle", "g_diagonal", "g_circular", "g_rectilinear", "norm"};
  for (double angle : {0.0, std::numbers::pi / 8.0, std::numbers::pi / 4.0}) {
    const SectorAmplitudes rotated = fock_product_state(3, 0).rotated(0, angle);
    const Eigen::Vector3d v = stokes_vector(rotated, ObservableKind::Sign);
    t.add_row({angle, v[0], v[1], v[2], v.norm()});
  }
  csv::write_to(o.out, t);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bell-inequality sweeps for polarization observables of bright quantum light"};
  app.set_version_flag("--version", std::string("stokesim ") + kVersion);
  app.require_subcommand(1);

  // one option block per subcommand so per-command defaults stay independent
  CommonOpts o_chsh, o_nonvac, o_per, o_block, o_eff, o_noise, o_ch, o_mermin, o_norm;
  int cutoff_b = 100;
  int n_max = 100;
  int blocks = 12;
  std::string inequality = "chsh";

  CLI::App* chsh = app.add_subcommand("chsh-curve", "CHSH LHS vs gain for the squeezed vacuum");
  add_common(chsh, o_chsh);

  CLI::App* nonvac = app.add_subcommand("nonvacuum-curve",
                                        "non-vacuum CHSH term at two cutoffs, with lower bound");
  o_nonvac.gamma_max = 3.0;
  add_common(nonvac, o_nonvac);
  nonvac->add_option("--cutoff-b", cutoff_b, "comparison cutoff")->check(CLI::PositiveNumber);

  CLI::App* per = app.add_subcommand("per-sector", "per-sector CHSH and CH values vs n");
  add_common(per, o_per);
  per->add_option("--n-max", n_max, "largest sector")->check(CLI::PositiveNumber);

  CLI::App* block = app.add_subcommand("block-average", "period-averaged CHSH vs block index");
  add_common(block, o_block);
  block->add_option("--blocks", blocks, "number of eight-sector periods")
      ->check(CLI::PositiveNumber);

  CLI::App* eff = app.add_subcommand("critical-efficiency", "critical detector efficiency vs gain");
  o_eff.gamma_min = 0.1;
  o_eff.gamma_max = 2.0;
  o_eff.gamma_step = 0.1;
  add_common(eff, o_eff);
  eff->add_option("--inequality", inequality, "chsh|mermin");

  CLI::App* noise = app.add_subcommand("critical-noise", "critical signal fraction vs gain");
  o_noise.gamma_min = 0.1;
  o_noise.gamma_max = 1.5;
  o_noise.gamma_step = 0.1;
  add_common(noise, o_noise);
  double noise_gamma_value = -1.0;
  CLI::Option* ng = noise->add_option("--noise-gamma", noise_gamma_value,
                                      "gain of the noise families (defaults to the signal gain)");

  CLI::App* ch = app.add_subcommand("ch-curve", "CH LHS vs gain (projector and rate kinds)");
  o_ch.gamma_min = 0.05;
  o_ch.gamma_max = 2.0;
  o_ch.cutoff = 50;
  add_common(ch, o_ch);

  CLI::App* mermin = app.add_subcommand("mermin-curve", "Mermin LHS vs gain for the GHZ-type state");
  o_mermin.gamma_max = 0.35;
  o_mermin.cutoff = 60;
  add_common(mermin, o_mermin);

  CLI::App* norm = app.add_subcommand("norm-demo", "sign-Stokes vector norm under state rotation");
  add_common(norm, o_norm);

  CLI11_PARSE(app, argc, argv);

  try {
    if (chsh->parsed()) {
      apply_config_file(chsh, o_chsh);
      return cmd_chsh_curve(o_chsh);
    }
    if (nonvac->parsed()) {
      apply_config_file(nonvac, o_nonvac);
      return cmd_nonvacuum_curve(o_nonvac, cutoff_b);
    }
    if (per->parsed()) {
      apply_config_file(per, o_per);
      return cmd_per_sector(o_per, n_max);
    }
    if (block->parsed()) {
      apply_config_file(block, o_block);
      return cmd_block_average(o_block, blocks);
    }
    if (eff->parsed()) {
      apply_config_file(eff, o_eff);
      return cmd_critical_efficiency(o_eff, inequality,
                                     eff->get_option("--cutoff")->count() > 0,
                                     eff->get_option("--gamma-max")->count() > 0);
    }
    if (noise->parsed()) {
      apply_config_file(noise, o_noise);
      std::optional<double> noise_gamma;
      if (ng->count() > 0) noise_gamma = noise_gamma_value;
      return cmd_critical_noise(o_noise, noise_gamma);
    }
    if (ch->parsed()) {
      apply_config_file(ch, o_ch);
      return cmd_ch_curve(o_ch);
    }
    if (mermin->parsed()) {
      apply_config_file(mermin, o_mermin);
      return cmd_mermin_curve(o_mermin);
    }
    if (norm->parsed()) {
      apply_config_file(norm, o_norm);
      return cmd_norm_demo(o_norm);
    }
  } catch (const std::exception& e) {
    std::cerr << "stokesim: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
