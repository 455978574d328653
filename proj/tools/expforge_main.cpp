// expforge command-line tool: reproducible experiments over the linear-
// code and Construction-A lattice ensembles.  Commands write CSV (curves)
// or JSON (verification/estimation reports); report bodies are fully
// determined by the parameters and seed, with wall-clock metadata pushed
// to a "<out>.meta.json" sidecar.
//
// Exit codes: 0 success, 2 invalid parameters, 3 enumeration budget
// exceeded (raise EXPFORGE_BUDGET or shrink the instance).

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "expforge/channel.hpp"
#include "expforge/ensemble.hpp"
#include "expforge/exponents.hpp"
#include "expforge/io.hpp"
#include "expforge/lattice.hpp"
#include "expforge/oracle.hpp"
#include "expforge/util.hpp"
#include "expforge/verify.hpp"

namespace {

using expforge::io::json;

// "lo:step:hi" (inclusive of hi up to a half-step) or "a,b,c".
std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    double lo, step, hi;
    char c1, c2;
    std::istringstream is(s);
    if (!(is >> lo >> c1 >> step >> c2 >> hi) || c1 != ':' || c2 != ':' ||
        !(step > 0))
      throw std::invalid_argument("cannot parse grid '" + s +
                                  "' (want lo:step:hi)");
    for (double x = lo; x <= hi + step / 2; x += step) out.push_back(x);
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  if (out.empty()) throw std::invalid_argument("empty grid '" + s + "'");
  return out;
}

// Exponent outputs are internal nats; the CLI divides by ln(base) when
// asked for bits (base 2) or q-ary units (base q of the channel/lattice).
double log_divisor(const std::string& base, int q) {
  if (base == "e") return 1.0;
  if (base == "2") return std::log(2.0);
  if (base == "q") {
    if (q < 2)
      throw std::invalid_argument("--log-base q needs a q-ary context");
    return std::log(static_cast<double>(q));
  }
  throw std::invalid_argument("unknown log base '" + base + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void emit(const std::string& out_path, const std::string& body,
          bool with_sidecar) {
  if (out_path.empty()) {
    std::cout << body;
    return;
  }
  if (with_sidecar) {
    // reuse the JSON sidecar writer for CSV too: same determinism contract
    expforge::io::write_text_file(out_path, body);
    json meta;
    meta["artifact"] = out_path;
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    meta["written_at"] = buf;
    expforge::io::write_text_file(out_path + ".meta.json",
                                  meta.dump(2) + "\n");
  } else {
    expforge::io::write_text_file(out_path, body);
  }
}

void emit_report(const std::string& out_path, const json& body) {
  if (out_path.empty()) {
    std::cout << body.dump(2) << "\n";
    return;
  }
  expforge::io::write_report_files(out_path, body);
}

json summary_to_json(const expforge::verify::CheckSummary& s) {
  json j;
  j["cases"] = s.cases;
  j["comparisons"] = s.comparisons;
  j["mismatches"] = s.mismatches;
  j["indeterminate"] = s.indeterminate;
  j["pass"] = s.pass();
  j["examples"] = s.examples;
  return j;
}

json wilson_to_json(const expforge::lattice::McEstimate& e) {
  json j;
  j["p_hat"] = e.p_hat;
  j["ci_low"] = e.ci_low;
  j["ci_high"] = e.ci_high;
  j["errors"] = e.errors;
  j["trials"] = e.trials;
  return j;
}

struct GlobalOpts {
  std::string out;
  std::string log_base = "e";
  std::uint64_t seed = 1;
  int threads = 0;
};

// --- exponents --------------------------------------------------------------

int cmd_exponents(const GlobalOpts& g, const std::string& channel_arg,
                  const std::string& rates_arg, double sigma2,
                  const std::string& deltas_arg,
                  const std::string& variant_arg) {
  using namespace expforge;
  std::ostringstream csv;
  csv << "# expforge exponents (schema " << io::kSchemaVersion << ", version "
      << io::kLibVersion << ")\n";
  csv << "# seed: " << g.seed << "\n";
  csv << "# log_base: " << g.log_base << "\n";

  if (!channel_arg.empty()) {
    const channel::Dmc ch = io::parse_channel(channel_arg);
    const double div = log_divisor(g.log_base, ch.q);
    const auto rates = parse_grid(rates_arg.empty() ? "0:0.05:0.7" : rates_arg);
    const double cap = channel::capacity_uniform(ch);
    const double r_cr = exponents::random_coding_exponent(ch, 0.0).r_crit;
    csv << "# channel: " << channel_arg << " (q=" << ch.q << ")\n";
    if (!channel::is_symmetric_channel(ch))
      csv << "# note: channel is not symmetric; uniform-input exponents are "
             "not necessarily the optima\n";
    csv << "# capacity_uniform: " << fmt(cap / div) << "\n";
    csv << "# R_cr: " << fmt(r_cr / div) << "\n";
    csv << "# columns: rate,E_r,rho_star_r,E_sp,rho_star_sp,sp_unbounded\n";
    for (double r_in : rates) {
      const double R = r_in * div;  // inputs are in the output's log base
      const auto er = exponents::random_coding_exponent(ch, R);
      double esp;
      double rho_sp;
      bool unbounded;
      if (R > 0) {
        const auto sp = exponents::sphere_packing_exponent(ch, R);
        esp = sp.exponent;
        rho_sp = sp.rho_star;
        unbounded = sp.unbounded;
      } else {
        // R = 0: the sup over rho >= 0 runs away along nondecreasing E_0
        esp = exponents::gallager_e0(ch, 64.0);
        rho_sp = 64.0;
        unbounded = true;
      }
      csv << fmt(r_in) << "," << fmt(er.exponent / div) << ","
          << fmt(er.rho_star) << "," << fmt(esp / div) << "," << fmt(rho_sp)
          << "," << (unbounded ? 1 : 0) << "\n";
    }
    emit(g.out, csv.str(), true);
    return 0;
  }

  if (deltas_arg.empty())
    throw std::invalid_argument(
        "exponents: need --channel (rate curve) or --deltas (lattice curve)");
  const double div = log_divisor(g.log_base, 2);
  const auto variant = variant_arg == "full"
                           ? exponents::PoltyrevVariant::FullConstant
                           : exponents::PoltyrevVariant::ContinuityMatched;
  const auto deltas = parse_grid(deltas_arg);
  csv << "# sigma2: " << fmt(sigma2) << "\n";
  csv << "# delta_star: " << fmt(exponents::delta_star(sigma2) / div) << "\n";
  csv << "# delta_crit: " << fmt(exponents::delta_crit(sigma2) / div) << "\n";
  csv << "# branch_variant: "
      << (variant == exponents::PoltyrevVariant::FullConstant
              ? "full-constant"
              : "continuity-matched")
      << "\n";
  csv << "# columns: delta,exponent\n";
  for (double d_in : deltas) {
    const double d = d_in * div;
    csv << fmt(d_in) << ","
        << fmt(exponents::poltyrev_exponent(d, sigma2, variant) / div) << "\n";
  }
  emit(g.out, csv.str(), true);
  return 0;
}

// --- verify-ensemble ---------------------------------------------------------

int cmd_verify_ensemble(const GlobalOpts& g, int q, int N, int K, int max_k) {
  using namespace expforge;
  const ensemble::CodeEnsembleSpec spec(q, N, K);
  const auto sum = verify::check_conditional_laws(spec, max_k);
  json params;
  params["q"] = q;
  params["N"] = N;
  params["K"] = K;
  params["max_k"] = max_k;
  json rep = io::make_report("verify-ensemble", params, g.seed);
  rep["results"]["conditional_laws"] = summary_to_json(sum);
  rep["results"]["pass"] = sum.pass();
  emit_report(g.out, rep);
  return sum.pass() ? 0 : 2;
}

// --- verify-bounds -----------------------------------------------------------

int cmd_verify_bounds(const GlobalOpts& g, int q, int N, int K,
                      const std::string& channel_arg,
                      const std::string& rhos_arg) {
  using namespace expforge;
  const ensemble::CodeEnsembleSpec spec(q, N, K);
  const auto ch = io::parse_exact_channel(channel_arg);
  if (ch.q != q)
    throw std::invalid_argument("channel modulus does not match --q");
  std::vector<int> twice_rhos;
  for (double r : parse_grid(rhos_arg.empty() ? "1,1.5,2" : rhos_arg)) {
    const double tr = 2 * r;
    if (std::abs(tr - std::round(tr)) > 1e-12 || tr < 2)
      throw std::invalid_argument(
          "--rhos entries must be >= 1 in half-integer steps");
    twice_rhos.push_back(static_cast<int>(std::round(tr)));
  }
  const auto intersections = verify::check_pairwise_intersections(spec, ch);
  const auto sandwich = verify::check_union_sandwich(spec, ch, twice_rhos);

  json params;
  params["q"] = q;
  params["N"] = N;
  params["K"] = K;
  params["channel"] = channel_arg;
  params["rhos"] = rhos_arg.empty() ? "1,1.5,2" : rhos_arg;
  json rep = io::make_report("verify-bounds", params, g.seed);
  rep["results"]["pairwise_intersections"] = summary_to_json(intersections);
  rep["results"]["union_sandwich"] = summary_to_json(sandwich);
  const bool pass = intersections.pass() && sandwich.pass();
  rep["results"]["pass"] = pass;
  emit_report(g.out, rep);
  return pass ? 0 : 2;
}

// --- exact-pe ----------------------------------------------------------------

int cmd_exact_pe(const GlobalOpts& g, int q, int N, int K,
                 const std::string& channel_arg) {
  using namespace expforge;
  const ensemble::CodeEnsembleSpec spec(q, N, K);
  const auto ch = io::parse_exact_channel(channel_arg);
  if (ch.q != q)
    throw std::invalid_argument("channel modulus does not match --q");
  json params;
  params["q"] = q;
  params["N"] = N;
  params["K"] = K;
  params["channel"] = channel_arg;
  json rep = io::make_report("exact-pe", params, g.seed);
  json per_message = json::array();
  std::optional<oracle::Rational> first;
  bool all_equal = true;
  for (std::uint64_t m = 0; m < spec.message_count(); ++m) {
    const auto r = oracle::exact_average_error(spec, ch, m);
    json row = io::rational_to_json(r.value);
    row["m"] = m;
    per_message.push_back(row);
    if (!first)
      first = r.value;
    else
      all_equal = all_equal && r.value == *first;
  }
  rep["results"]["per_message"] = per_message;
  rep["results"]["message_independent"] = all_equal;
  emit_report(g.out, rep);
  return 0;
}

// --- mc-lattice --------------------------------------------------------------

int cmd_mc_lattice(const GlobalOpts& g, int N, double R,
                   std::optional<double> delta_abs,
                   std::optional<double> delta_offset, double sigma2,
                   const std::string& q_arg, std::uint64_t trials) {
  using namespace expforge;
  const double ds = exponents::delta_star(sigma2);
  const double dc = exponents::delta_crit(sigma2);
  if (delta_abs && delta_offset)
    throw std::invalid_argument("give --delta or --delta-offset, not both");
  const double delta =
      delta_abs ? *delta_abs : ds + (delta_offset ? *delta_offset : -1.0);
  const int K = lattice::rate_dimension(N, R);
  int q;
  if (q_arg == "auto") {
    q = lattice::choose_q(N, R, delta);
  } else {
    q = std::stoi(q_arg);
    if (!fq::is_prime(q))
      throw std::invalid_argument("--q must be prime or 'auto'");
  }
  const auto cfg = lattice::make_config(q, N, K, delta, sigma2);
  const auto mc = lattice::mc_error_probability(cfg, trials, g.seed, g.threads);
  const auto bnd = lattice::p1_p2(cfg);
  const double div = log_divisor(g.log_base, q);

  json params;
  params["N"] = N;
  params["R"] = R;
  params["delta"] = delta;
  params["sigma2"] = sigma2;
  params["q"] = q_arg;
  params["trials"] = trials;
  params["threads"] = g.threads;
  json rep = io::make_report("mc-lattice", params, g.seed);
  json& res = rep["results"];
  res["q"] = q;
  res["K"] = K;
  res["beta"] = cfg.beta;
  res["gamma"] = cfg.gamma;
  res["r_star"] = bnd.r_star;
  res["delta_star"] = ds;
  res["delta_crit"] = dc;
  res["p1"] = bnd.p1;
  res["p2"] = bnd.p2;
  res["band"] = {bnd.p1 / q, bnd.p1 + bnd.p2};
  res["upper"] = wilson_to_json(mc.upper);
  res["lower"] = wilson_to_json(mc.lower);
  res["out_of_ball"] = mc.out_of_ball;
  res["exponent_predicted"] =
      exponents::poltyrev_exponent(delta, sigma2) / div;
  if (mc.upper.p_hat > 0)
    res["exponent_observed_upper"] = -std::log(mc.upper.p_hat) / N / div;
  emit_report(g.out, rep);
  return 0;
}

// --- slope -------------------------------------------------------------------

int cmd_slope(const GlobalOpts& g, const std::string& in_path,
              const std::string& points_arg) {
  using namespace expforge;
  std::vector<std::pair<double, double>> data;
  if (!points_arg.empty()) {
    std::stringstream ss(points_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("--points wants N:p pairs");
      data.emplace_back(std::stod(item.substr(0, colon)),
                        std::stod(item.substr(colon + 1)));
    }
  } else {
    if (in_path.empty())
      throw std::invalid_argument("slope: need --in CSV or --points");
    std::ifstream in(in_path);
    if (!in) throw std::invalid_argument("cannot open " + in_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::stringstream ls(line);
      std::string a, b;
      if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',')) continue;
      try {
        data.emplace_back(std::stod(a), std::stod(b));
      } catch (const std::exception&) {
        continue;  // header row or other non-numeric line
      }
    }
  }
  const auto fit = exponents::slope_fit(data);
  json params;
  params["in"] = in_path;
  params["points"] = points_arg;
  json rep = io::make_report("slope", params, g.seed);
  rep["results"]["estimate"] = fit.estimate;
  rep["results"]["std_error"] = fit.std_error;
  rep["results"]["n_range"] = fit.n_range;
  emit_report(g.out, rep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "expforge: error exponents, random linear code ensembles, and "
      "Construction-A lattice experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--out", g.out, "output file (stdout when omitted)");
  app.add_option("--log-base", g.log_base,
                 "unit for rates/exponents at the boundary: e, 2, or q")
      ->check(CLI::IsMember({"e", "2", "q"}));
  app.add_option("--seed", g.seed, "RNG seed, recorded in every report");
  app.add_option("--threads", g.threads,
                 "worker threads for Monte Carlo (0 = hardware)");

  auto* c_exp = app.add_subcommand(
      "exponents", "tabulate E_r / E_sp over rates, or the lattice exponent "
                   "over NLD deltas, as CSV");
  std::string channel_arg, rates_arg, deltas_arg, variant_arg = "matched";
  double sigma2 = 1.0 / (2 * expforge::lattice::kPi * std::exp(1.0));
  c_exp->add_option("--channel", channel_arg,
                    "bsc:<eps>, qsc:<q>:<eps>, or a JSON matrix file");
  c_exp->add_option("--rates", rates_arg, "rate grid lo:step:hi or list");
  c_exp->add_option("--sigma2", sigma2, "AWGN variance for the lattice curve");
  c_exp->add_option("--deltas", deltas_arg, "NLD grid lo:step:hi or list");
  c_exp->add_option("--variant", variant_arg,
                    "low-delta branch constant: matched (ln(e/4)/2, continuous)"
                    " or full (ln(e/4))")
      ->check(CLI::IsMember({"matched", "full"}));

  auto* c_ve = app.add_subcommand(
      "verify-ensemble",
      "exhaustively check the conditional codeword laws on one (q, N, K)");
  int q = 2, N = 2, K = 1, max_k = 3;
  c_ve->add_option("--q", q, "field size (prime)")->required();
  c_ve->add_option("--N", N, "blocklength")->required();
  c_ve->add_option("--K", K, "message length")->required();
  c_ve->add_option("--max-k", max_k, "largest conditioning set size");

  auto* c_vb = app.add_subcommand(
      "verify-bounds", "check pairwise intersections and the union sandwich "
                       "against the enumeration oracle");
  int bq = 2, bN = 2, bK = 1;
  std::string b_channel, rhos_arg;
  c_vb->add_option("--q", bq, "field size (prime)")->required();
  c_vb->add_option("--N", bN, "blocklength")->required();
  c_vb->add_option("--K", bK, "message length")->required();
  c_vb->add_option("--channel", b_channel, "exact channel descriptor")
      ->required();
  c_vb->add_option("--rhos", rhos_arg, "sandwich exponents (half-integers)");

  auto* c_pe = app.add_subcommand(
      "exact-pe",
      "exact ensemble-average error probability for every message");
  int pq = 2, pN = 2, pK = 1;
  std::string p_channel;
  c_pe->add_option("--q", pq, "field size (prime)")->required();
  c_pe->add_option("--N", pN, "blocklength")->required();
  c_pe->add_option("--K", pK, "message length")->required();
  c_pe->add_option("--channel", p_channel, "exact channel descriptor")
      ->required();

  auto* c_mc = app.add_subcommand(
      "mc-lattice", "Monte Carlo error probability of the zero'th lattice "
                    "point with the semi-analytic sandwich");
  int mN = 4;
  double mR = 0.5;
  std::optional<double> delta_abs, delta_offset;
  double m_sigma2 = 1.0 / (2 * expforge::lattice::kPi * std::exp(1.0));
  std::string q_arg = "auto";
  std::uint64_t trials = 100000;
  c_mc->add_option("--N", mN, "dimension")->required();
  c_mc->add_option("--R", mR, "code rate in (0, 1], K = ceil(RN)")->required();
  c_mc->add_option("--delta", delta_abs, "absolute NLD (nats per dimension)");
  c_mc->add_option("--delta-offset", delta_offset,
                   "NLD relative to delta_star (negative = below capacity)");
  c_mc->add_option("--sigma2", m_sigma2, "AWGN variance per dimension");
  c_mc->add_option("--q", q_arg, "prime modulus or 'auto'");
  c_mc->add_option("--trials", trials, "Monte Carlo trials");

  auto* c_sl = app.add_subcommand(
      "slope", "least-squares exponent fit from (N, probability) data");
  std::string in_path, points_arg;
  c_sl->add_option("--in", in_path, "CSV with N,p rows ('#' comments ok)");
  c_sl->add_option("--points", points_arg, "inline N:p,N:p,... pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(c_exp))
      return cmd_exponents(g, channel_arg, rates_arg, sigma2, deltas_arg,
                           variant_arg);
    if (app.got_subcommand(c_ve)) return cmd_verify_ensemble(g, q, N, K, max_k);
    if (app.got_subcommand(c_vb))
      return cmd_verify_bounds(g, bq, bN, bK, b_channel, rhos_arg);
    if (app.got_subcommand(c_pe)) return cmd_exact_pe(g, pq, pN, pK, p_channel);
    if (app.got_subcommand(c_mc))
      return cmd_mc_lattice(g, mN, mR, delta_abs, delta_offset, m_sigma2,
                            q_arg, trials);
    if (app.got_subcommand(c_sl)) return cmd_slope(g, in_path, points_arg);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const expforge::budget_error& e) {
    std::cerr << "budget error: " << e.what() << "\n"
              << "suggestion: shrink N/K or set EXPFORGE_BUDGET >= "
              << e.estimate << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
