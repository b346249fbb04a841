#ifndef ISOMONO_EXPERIMENTS_HPP
#define ISOMONO_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "isomono/darboux.hpp"
#include "isomono/garnier.hpp"
#include "isomono/genus2.hpp"
#include "isomono/monodromy.hpp"
#include "isomono/report.hpp"
#include "isomono/sampling.hpp"
#include "isomono/transversality.hpp"

namespace isomono
{

inline const std::vector<std::string>& experiment_names()
{
  static const std::vector<std::string> names{"identities",       "transversality", "monodromy-invariants", "isomonodromy",
                                              "riccati-geometry", "rh-rank",        "double-cover"};
  return names;
}

/// Every pass/fail threshold used by the experiments.
struct Thresholds
{
  real roundtrip = 1e-9;
  real symplectic = 1e-6;
  real discriminant = 1e-12;
  real det_agreement = 1e-6;
  real vanish = 1e-8;
  real nonvanish = 1e-3;
  real local_trace = 1e-6;
  real local_det = 1e-8;
  real product = 1e-6;
  real isomonodromy = 1e-6;
  real flow_return = 1e-6;
  real order_swap = 1e-6;
  real rank_ratio = 1e-6;
  real degeneration_drop = 100;
  real branch_swap = 1e-8;
  real hyperelliptic = 1e-6;
};

struct ExperimentConfig
{
  std::string experiment;
  std::uint64_t seed = 1;
  /// Main sample count; the experiment's default when unset.
  std::optional<int> samples;
  int reducible_samples = 20;
  int generic_samples = 20;
  int heights = 5;
  real tol_ode = 1e-10;
  Thresholds thresholds;
  PoleBox pole_box;
  /// Half-width of the boxes for z, c and for (q, p).
  real coef_box = 0.5;
  /// Half-width of the box for nu.
  real nu_box = 0.3;
  /// Length of each ti-segment in the isomonodromy experiment.
  real segment_length = 0.1;
  /// Finite-difference step for the Riemann-Hilbert Jacobian, relative to the parameter scale.
  real fd_step = 1e-4;
  std::string out;
  std::string format = "json";
  /// Worker threads; 0 selects the hardware concurrency.
  unsigned threads = 0;
  /// Explicit inputs for single-task verbs (flow, fibers, rh-rank); seeded samples when empty.
  json inputs = json::object();

  int default_samples() const
  {
    if (experiment == "identities" || experiment == "transversality") return 100;
    if (experiment == "monodromy-invariants" || experiment == "rh-rank") return 10;
    if (experiment == "isomonodromy") return 5;
    if (experiment == "riccati-geometry") return 20;
    if (experiment == "double-cover") return 3;
    return 1;
  }

  int sample_count() const { return samples.value_or(default_samples()); }

  void validate() const
  {
    auto positive = [](real v, const char* name) {
      if (!(v > 0)) throw Error(ErrorCode::invalid_argument, std::string(name) + " must be > 0");
    };
    if (samples && *samples < 1) throw Error(ErrorCode::invalid_argument, "samples must be >= 1");
    if (reducible_samples < 1 || generic_samples < 1 || heights < 1)
      throw Error(ErrorCode::invalid_argument, "sample counts must be >= 1");
    positive(tol_ode, "tol_ode");
    positive(coef_box, "coef_box");
    positive(nu_box, "nu_box");
    positive(segment_length, "segment_length");
    positive(fd_step, "fd_step");
    const auto& t = thresholds;
    for (real v : {t.roundtrip, t.symplectic, t.discriminant, t.det_agreement, t.vanish, t.nonvanish, t.local_trace, t.local_det,
                   t.product, t.isomonodromy, t.flow_return, t.order_swap, t.rank_ratio, t.degeneration_drop, t.branch_swap,
                   t.hyperelliptic})
      positive(v, "threshold");
    positive(pole_box.half_width, "pole_box.half_width");
    positive(pole_box.guard, "pole_box.guard");
    // the box must leave room for three points pairwise guard apart and away from 0 and 1
    if (pole_box.half_width < 2 * pole_box.guard) throw Error(ErrorCode::invalid_argument, "pole_box too small for its guard");
    report_format_from_string(format);
  }
};

inline json to_json(const Thresholds& t)
{
  return {{"roundtrip", t.roundtrip},
          {"symplectic", t.symplectic},
          {"discriminant", t.discriminant},
          {"det_agreement", t.det_agreement},
          {"vanish", t.vanish},
          {"nonvanish", t.nonvanish},
          {"local_trace", t.local_trace},
          {"local_det", t.local_det},
          {"product", t.product},
          {"isomonodromy", t.isomonodromy},
          {"flow_return", t.flow_return},
          {"order_swap", t.order_swap},
          {"rank_ratio", t.rank_ratio},
          {"degeneration_drop", t.degeneration_drop},
          {"branch_swap", t.branch_swap},
          {"hyperelliptic", t.hyperelliptic}};
}

inline void from_json_into(const json& j, Thresholds& t)
{
  auto get = [&](const char* k, real& v) {
    if (j.contains(k)) v = j.at(k).get<real>();
  };
  get("roundtrip", t.roundtrip);
  get("symplectic", t.symplectic);
  get("discriminant", t.discriminant);
  get("det_agreement", t.det_agreement);
  get("vanish", t.vanish);
  get("nonvanish", t.nonvanish);
  get("local_trace", t.local_trace);
  get("local_det", t.local_det);
  get("product", t.product);
  get("isomonodromy", t.isomonodromy);
  get("flow_return", t.flow_return);
  get("order_swap", t.order_swap);
  get("rank_ratio", t.rank_ratio);
  get("degeneration_drop", t.degeneration_drop);
  get("branch_swap", t.branch_swap);
  get("hyperelliptic", t.hyperelliptic);
}

inline json to_json(const ExperimentConfig& c)
{
  return {{"experiment", c.experiment},
          {"seed", c.seed},
          {"samples", c.sample_count()},
          {"reducible_samples", c.reducible_samples},
          {"generic_samples", c.generic_samples},
          {"heights", c.heights},
          {"tol_ode", c.tol_ode},
          {"tol_alg", c.thresholds.roundtrip},
          {"thresholds", to_json(c.thresholds)},
          {"pole_box", {{"half_width", c.pole_box.half_width}, {"guard", c.pole_box.guard}}},
          {"coef_box", c.coef_box},
          {"nu_box", c.nu_box},
          {"segment_length", c.segment_length},
          {"fd_step", c.fd_step},
          {"out", c.out},
          {"format", c.format},
          {"inputs", c.inputs}};
}

/// Reads the fields present in j on top of `base`; unknown keys are rejected.
inline ExperimentConfig config_from_json(const json& j, ExperimentConfig c = {})
{
  if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "config must be a JSON object");
  static const std::vector<std::string> known{"experiment", "seed",     "samples",   "reducible_samples", "generic_samples",
                                              "heights",    "tol_ode",  "tol_alg",   "thresholds",        "pole_box",
                                              "coef_box",   "nu_box",   "segment_length", "fd_step",        "out",
                                              "format",     "threads",  "inputs"};
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw Error(ErrorCode::invalid_argument, "unknown config key '" + k + "'");
  if (j.contains("experiment")) c.experiment = j["experiment"].get<std::string>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("samples")) c.samples = j["samples"].get<int>();
  if (j.contains("reducible_samples")) c.reducible_samples = j["reducible_samples"].get<int>();
  if (j.contains("generic_samples")) c.generic_samples = j["generic_samples"].get<int>();
  if (j.contains("heights")) c.heights = j["heights"].get<int>();
  if (j.contains("tol_ode")) c.tol_ode = j["tol_ode"].get<real>();
  if (j.contains("thresholds")) from_json_into(j["thresholds"], c.thresholds);
  if (j.contains("tol_alg")) c.thresholds.roundtrip = j["tol_alg"].get<real>();
  if (j.contains("pole_box")) {
    const auto& b = j["pole_box"];
    if (b.contains("half_width")) c.pole_box.half_width = b["half_width"].get<real>();
    if (b.contains("guard")) c.pole_box.guard = b["guard"].get<real>();
  }
  if (j.contains("coef_box")) c.coef_box = j["coef_box"].get<real>();
  if (j.contains("nu_box")) c.nu_box = j["nu_box"].get<real>();
  if (j.contains("segment_length")) c.segment_length = j["segment_length"].get<real>();
  if (j.contains("fd_step")) c.fd_step = j["fd_step"].get<real>();
  if (j.contains("out")) c.out = j["out"].get<std::string>();
  if (j.contains("format")) c.format = j["format"].get<std::string>();
  if (j.contains("threads")) c.threads = j["threads"].get<unsigned>();
  if (j.contains("inputs")) c.inputs = j["inputs"];
  return c;
}

namespace detail
{

using CaseList = std::vector<CaseRecord>;

/// Runs f(i) for i in [0, n) on a worker pool; results are concatenated in index order.
inline CaseList run_parallel(std::size_t n, unsigned threads, const std::function<CaseList(std::size_t)>& f)
{
  std::vector<CaseList> slots(n);
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) slots[i] = f(i);
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  CaseList out;
  for (auto& s : slots)
    for (auto& c : s) out.push_back(std::move(c));
  return out;
}

/// Builds one record; any exception becomes a failed case carrying the message.
inline CaseRecord guarded(std::size_t index, const std::string& check, const std::function<void(CaseRecord&)>& body)
{
  CaseRecord rec;
  rec.index = index;
  rec.check = check;
  try {
    body(rec);
  } catch (const std::exception& e) {
    rec.message = e.what();
  }
  rec.finalize();
  return rec;
}

inline real max_abs(const std::vector<complex>& v)
{
  real m = 0;
  for (const complex& x : v) m = std::max(m, std::abs(x));
  return m;
}

inline real max_diff(const std::vector<complex>& a, const std::vector<complex>& b)
{
  if (a.size() != b.size()) return std::numeric_limits<real>::infinity();
  real m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

inline real rel_diff(const std::vector<complex>& a, const std::vector<complex>& b)
{
  return max_diff(a, b) / std::max(real(1), max_abs(b));
}

inline std::vector<complex> to_vec(const ComplexVector& v) { return {v.data(), v.data() + v.size()}; }

inline json poles_json(const PoleConfig& pc) { return complex_array(pc.t); }

inline json darboux_json(const DarbouxPoint& d) { return {{"q", complex_array(d.q)}, {"p", complex_array(d.p)}}; }

inline std::vector<complex> flat(const DarbouxPoint& d) { return {d.q[0], d.q[1], d.q[2], d.p[0], d.p[1], d.p[2]}; }

/// (q, p) pairs sorted by q, for comparing points up to relabeling.
inline DarbouxPoint sorted(const DarbouxPoint& d)
{
  std::array<std::size_t, 3> idx{0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return lex_less(d.q[a], d.q[b]); });
  DarbouxPoint s;
  for (std::size_t k = 0; k < 3; ++k) {
    s.q[k] = d.q[idx[k]];
    s.p[k] = d.p[idx[k]];
  }
  return s;
}

inline real darboux_rel_diff(const DarbouxPoint& a, const DarbouxPoint& b)
{
  return max_diff(flat(a), flat(b)) / std::max(real(1), max_abs(flat(b)));
}

inline DarbouxPoint random_darboux(Rng& rng, real qbox, real pbox)
{
  DarbouxPoint d;
  for (;;) {
    for (int k = 0; k < 3; ++k) {
      d.q[k] = uniform_complex(rng, qbox);
      d.p[k] = uniform_complex(rng, pbox);
    }
    if (min_q_gap(d) > real(0.1) * qbox) return d;
  }
}

inline SigmaPoint random_sigma(Rng& rng, real box)
{
  SigmaPoint s{uniform_complex(rng, box), {uniform_complex(rng, box), uniform_complex(rng, box), 0}};
  s.c[2] = -s.c[0] - s.c[1];
  return s;
}

inline Genus2System random_genus2(Rng& rng, const PoleConfig& pc)
{
  Genus2System g;
  g.poles = pc;
  for (;;) {
    g.beta0 = uniform_complex(rng);
    g.beta1 = uniform_complex(rng);
    g.gamma0 = uniform_complex(rng);
    g.gamma1 = uniform_complex(rng);
    const real s = g.scale();
    if (std::abs(g.wronskian()) > real(1e-2) * s * s) return g;
  }
}

inline real sigma_size(const SigmaPoint& s)
{
  return std::max({std::abs(s.z), std::abs(s.c[0]), std::abs(s.c[1]), std::abs(s.c[2])});
}

/// nu well away from the reducible locus whose Sigma preimages (both branches) stay small.
inline bool acceptable_nu(const PoleConfig& pc, const QuadraticDifferential& nu, real disc_margin, real max_size)
{
  const real s = nu.scale();
  if (std::abs(nu.discriminant()) <= disc_margin * s * s) return false;
  try {
    for (int r = 0; r < 2; ++r)
      if (sigma_size(section_phi(pc, nu, r)) > max_size) return false;
  } catch (const Error&) {
    return false;
  }
  return true;
}

inline std::pair<PoleConfig, QuadraticDifferential> random_rh_point(Rng& rng, const ExperimentConfig& cfg)
{
  for (;;) {
    const PoleConfig pc = sample_poles(rng, cfg.pole_box);
    const QuadraticDifferential nu{uniform_complex(rng, cfg.nu_box), uniform_complex(rng, cfg.nu_box), uniform_complex(rng, cfg.nu_box)};
    if (acceptable_nu(pc, nu, 0.05, 1.0)) return {pc, nu};
  }
}

inline std::vector<complex> traces_at(const FuchsianSystem& sys, complex b, real tol)
{
  return even_word_traces(fuchsian_monodromy(sys, standard_loops(sys.poles, b), tol), default_words());
}

inline std::vector<complex> traces_at(const PoleConfig& pc, const DarbouxPoint& d, complex b, real tol)
{
  return traces_at(psi(pc, d).system(pc), b, tol);
}

}

// ---------------------------------------------------------------------------------------------
// individual suites

inline detail::CaseList identities_case(const ExperimentConfig& cfg, std::size_t i)
{
  Rng rng(case_seed(cfg.seed, i));
  const auto& thr = cfg.thresholds;
  const PoleConfig pc = sample_poles(rng, cfg.pole_box);
  const DarbouxPoint d = detail::random_darboux(rng, 2, 1);
  const ZC zc{{uniform_complex(rng), uniform_complex(rng), uniform_complex(rng)},
              {uniform_complex(rng), uniform_complex(rng), uniform_complex(rng)}};
  const SigmaPoint sp = detail::random_sigma(rng, 1);
  const SigmaDarbPoint sd{uniform_complex(rng), uniform_complex(rng), uniform_complex(rng, 2)};
  const Genus2System g = detail::random_genus2(rng, pc);
  const json tj = detail::poles_json(pc);

  detail::CaseList out;
  out.push_back(detail::guarded(i, "psi-inverse-after-psi", [&](CaseRecord& r) {
    r.inputs = {{"t", tj}, {"d", detail::darboux_json(d)}};
    const DarbouxPoint back = psi_inverse(pc, psi(pc, d));
    r.outputs = {{"d", detail::darboux_json(back)}};
    r.add("relative_error", detail::darboux_rel_diff(back, detail::sorted(d)), thr.roundtrip);
  }));
  out.push_back(detail::guarded(i, "psi-after-psi-inverse", [&](CaseRecord& r) {
    r.inputs = {{"t", tj}, {"z", complex_array(zc.z)}, {"c", complex_array(zc.c)}};
    const ZC back = psi(pc, psi_inverse(pc, zc));
    r.add("relative_error", detail::rel_diff(detail::to_vec(back.flat()), detail::to_vec(zc.flat())), thr.roundtrip);
  }));
  out.push_back(detail::guarded(i, "sigma-roundtrip", [&](CaseRecord& r) {
    r.inputs = {{"t", tj}, {"z", to_json_value(sp.z)}, {"c", complex_array(sp.c)}};
    const SigmaPoint back = sigma_darb_to_sigma(pc, sigma_to_sigma_darb(pc, sp));
    r.add("relative_error",
          detail::rel_diff({back.z, back.c[0], back.c[1], back.c[2]}, {sp.z, sp.c[0], sp.c[1], sp.c[2]}), thr.roundtrip);
  }));
  out.push_back(detail::guarded(i, "sigma-darb-roundtrip", [&](CaseRecord& r) {
    r.inputs = {{"t", tj}, {"p1", to_json_value(sd.p1)}, {"p2", to_json_value(sd.p2)}, {"q3", to_json_value(sd.q3)}};
    const SigmaDarbPoint back = sigma_to_sigma_darb(pc, sigma_darb_to_sigma(pc, sd));
    r.add("relative_error", detail::rel_diff({back.p1, back.p2, back.q3}, {sd.p1, sd.p2, sd.q3}), thr.roundtrip);
  }));
  out.push_back(detail::guarded(i, "symplectic", [&](CaseRecord& r) {
    r.inputs = {{"t", tj}, {"d", detail::darboux_json(d)}};
    r.add("defect", symplectic_defect(pc, d), thr.symplectic);
  }));
  out.push_back(detail::guarded(i, "discriminant", [&](CaseRecord& r) {
    r.inputs = {{"beta", complex_array(std::array<complex, 2>{g.beta0, g.beta1})},
                {"gamma", complex_array(std::array<complex, 2>{g.gamma0, g.gamma1})}};
    const auto nu = det_quadratic(g);
    const complex w = g.wronskian();
    const real s = std::max(real(1), g.scale());
    r.add("error", std::abs(nu.discriminant() - w * w) / (s * s * s * s), thr.discriminant);
  }));
  return out;
}

inline detail::CaseList transversality_agreement_case(const ExperimentConfig& cfg, std::size_t i)
{
  Rng rng(case_seed(cfg.seed, i));
  const PoleConfig pc = sample_poles(rng, cfg.pole_box);
  const complex p1 = uniform_complex(rng), p2 = uniform_complex(rng);
  complex q3;
  do q3 = uniform_complex(rng, 2);
  while (std::abs(q3) < 0.1 || std::abs(q3 - real(1)) < 0.1);
  return {detail::guarded(i, "det-agreement", [&](CaseRecord& r) {
    r.inputs = {{"t", detail::poles_json(pc)}, {"p1", to_json_value(p1)}, {"p2", to_json_value(p2)}, {"q3", to_json_value(q3)}};
    const complex closed = transversality_det_closed(pc, p1, p2, q3);
    const complex logf = transversality_det_numeric(pc, p1, p2, q3, PLinearTerm::log_derivative_of_F);
    const complex iso = transversality_det_numeric(pc, p1, p2, q3, PLinearTerm::trace_connection);
    r.outputs = {{"closed", to_json_value(closed)}, {"numeric_log_derivative_of_F", to_json_value(logf)},
                 {"numeric_trace_connection", to_json_value(iso)}};
    const real s = std::abs(closed);
    r.add("relative_error_log_derivative_of_F", std::abs(logf - closed) / s, cfg.thresholds.det_agreement);
    r.add("relative_error_trace_connection_negated", std::abs(iso + closed) / s, cfg.thresholds.det_agreement);
  })};
}

inline detail::CaseList transversality_locus_case(const ExperimentConfig& cfg, std::size_t i, bool reducible)
{
  Rng rng(case_seed(cfg.seed ^ (reducible ? 0x5eedULL : 0xfeedULL), i));
  const auto& thr = cfg.thresholds;
  const PoleConfig pc = sample_poles(rng, cfg.pole_box);
  SigmaPoint sp = detail::random_sigma(rng, 1);
  const std::string tag = reducible ? "reducible" : "generic";
  detail::CaseList out;
  const json inputs_base = {{"t", detail::poles_json(pc)}, {"c", complex_array(sp.c)}};
  out.push_back(detail::guarded(i, "det-" + tag, [&](CaseRecord& r) {
    if (reducible) sp.z = reducible_z(pc, sp.c);
    r.inputs = inputs_base;
    r.inputs["z"] = to_json_value(sp.z);
    const auto res = reducible_residual_sigma_scaled(pc, sp.z, sp.c);
    const SigmaDarbPoint d = sigma_to_sigma_darb(pc, sp);
    const auto det = transversality_det_closed_scaled(pc, d.p1, d.p2, d.q3);
    r.outputs = {{"p1", to_json_value(d.p1)}, {"p2", to_json_value(d.p2)}, {"q3", to_json_value(d.q3)},
                 {"det", to_json_value(det.value)}, {"residual", to_json_value(res.value)}};
    const Comparison cmp = reducible ? Comparison::below : Comparison::above;
    const real thr_v = reducible ? thr.vanish : thr.nonvanish;
    r.add("det_over_scale", std::abs(det.value) / det.scale, thr_v, cmp);
    r.add("residual_over_scale", std::abs(res.value) / res.scale, thr_v, cmp);
  }));
  out.push_back(detail::guarded(i, "conic-" + tag, [&](CaseRecord& r) {
    if (reducible) sp.z = reducible_z(pc, sp.c);
    r.inputs = inputs_base;
    r.inputs["z"] = to_json_value(sp.z);
    const auto conic = tangent_cone_conic(pc, sp.z, sp.c[0], sp.c[1], thr.vanish);
    const real s = conic.form.scale();
    r.outputs = {{"det", to_json_value(conic.det)}, {"smooth", conic.smooth}};
    r.add("det_over_scale3", std::abs(conic.det) / (s * s * s), reducible ? thr.vanish : thr.nonvanish,
          reducible ? Comparison::below : Comparison::above);
  }));
  return out;
}

inline detail::CaseList monodromy_case(const ExperimentConfig& cfg, std::size_t i)
{
  Rng rng(case_seed(cfg.seed, i));
  FuchsianSystem sys;
  sys.poles = sample_poles(rng, cfg.pole_box);
  for (int k = 0; k < 3; ++k) sys.z[k] = uniform_complex(rng, cfg.coef_box);
  for (int k = 0; k < 3; ++k) sys.c[k] = uniform_complex(rng, cfg.coef_box);
  return {detail::guarded(i, "local-invariants", [&](CaseRecord& r) {
    r.inputs = {{"t", detail::poles_json(sys.poles)}, {"z", complex_array(sys.z)}, {"c", complex_array(sys.c)}};
    const auto rep = fuchsian_monodromy(sys, cfg.tol_ode);
    r.outputs = {{"traces", complex_array(even_word_traces(rep, default_words()))},
                 {"basepoint", to_json_value(rep.loops.basepoint)},
                 {"product_sensitivity", rep.diagnostics.product_sensitivity},
                 {"rhs_evaluations", rep.diagnostics.stats.rhs_evaluations}};
    r.add("max_abs_trace", rep.diagnostics.max_abs_trace, cfg.thresholds.local_trace);
    r.add("max_det_plus_one", rep.diagnostics.max_det_defect, cfg.thresholds.local_det);
    r.add("product_minus_identity", rep.diagnostics.product_defect, cfg.thresholds.product);
  })};
}

struct IsomonodromySample
{
  PoleConfig t;
  SigmaPoint sigma;
  DarbouxPoint d0;
};

/// Irreducible Sigma point whose Darboux image is well inside the chart.
inline IsomonodromySample sample_isomonodromy(Rng& rng, const ExperimentConfig& cfg)
{
  for (int attempt = 0; attempt < 200; ++attempt) {
    const PoleConfig pc = sample_poles(rng, cfg.pole_box);
    const SigmaPoint s = detail::random_sigma(rng, cfg.coef_box);
    try {
      const SigmaDarbPoint sd = sigma_to_sigma_darb(pc, s);
      const DarbouxPoint d0 = sd.full();
      if (min_q_gap(d0) < 0.2 || std::abs(sd.p1) > 5 || std::abs(sd.p2) > 5) continue;
      if (std::abs(reducible_residual_sigma(pc, s.z, s.c)) < 1e-2) continue;
      return {pc, s, d0};
    } catch (const Error&) {
    }
  }
  throw Error(ErrorCode::degenerate_input, "no admissible Sigma point found");
}

inline detail::CaseList isomonodromy_case(const ExperimentConfig& cfg, std::size_t i)
{
  Rng rng(case_seed(cfg.seed, i));
  const auto& thr = cfg.thresholds;
  detail::CaseList out;
  IsomonodromySample smp;
  try {
    smp = sample_isomonodromy(rng, cfg);
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    out.push_back(detail::guarded(i, "sample", [&](CaseRecord& r) { r.message = msg; }));
    return out;
  }
  const PoleConfig pc = smp.t;
  const DarbouxPoint d0 = smp.d0;
  const complex b = default_basepoint(pc);
  const real L = cfg.segment_length;
  const real flow_tol = std::min(cfg.tol_ode, real(1e-11));
  const json base = {{"t", detail::poles_json(pc)}, {"z", to_json_value(smp.sigma.z)}, {"c", complex_array(smp.sigma.c)},
                     {"d0", detail::darboux_json(d0)}};
  std::vector<complex> ref;
  out.push_back(detail::guarded(i, "irreducible-start", [&](CaseRecord& r) {
    r.inputs = base;
    const auto rep = fuchsian_monodromy(smp.sigma.system(pc), standard_loops(pc, b), cfg.tol_ode);
    ref = even_word_traces(rep, default_words());
    const auto irr = irreducibility_test(rep);
    r.outputs = {{"traces", complex_array(ref)}, {"min_motion", irr.min_motion}};
    r.add("irreducible", irr.irreducible ? 1 : 0, 1, Comparison::equal);
    r.add("product_minus_identity", rep.diagnostics.product_defect, thr.product);
  }));
  for (int k = 1; k <= 3; ++k) {
    out.push_back(detail::guarded(i, "segment-t" + std::to_string(k), [&](CaseRecord& r) {
      r.inputs = base;
      r.inputs["delta"] = to_json_value(complex(L));
      if (ref.empty()) throw Error(ErrorCode::degenerate_input, "no reference traces");
      const auto traj = isomonodromic_flow(TPath::along(pc, k, L), d0, flow_tol);
      const auto tr = detail::traces_at(traj.end_poles(), traj.end_point(), b, cfg.tol_ode);
      r.outputs = {{"d_end", detail::darboux_json(traj.end_point())}, {"traces", complex_array(tr)},
                   {"steps", traj.stats.accepted}};
      r.add("trace_drift", detail::rel_diff(tr, ref), thr.isomonodromy);
      // informational: the same segment under the log-derivative-of-F linear term
      try {
        FlowOptions fo;
        fo.form = PLinearTerm::log_derivative_of_F;
        const auto alt = isomonodromic_flow(TPath::along(pc, k, L), d0, flow_tol, fo);
        r.outputs["trace_drift_log_derivative_of_F"] =
            detail::rel_diff(detail::traces_at(alt.end_poles(), alt.end_point(), b, cfg.tol_ode), ref);
      } catch (const Error& e) {
        r.outputs["trace_drift_log_derivative_of_F"] = e.what();
      }
    }));
  }
  out.push_back(detail::guarded(i, "closed-loop", [&](CaseRecord& r) {
    r.inputs = base;
    PoleConfig a = pc, c = pc, e = pc;
    a.t[0] += L;
    c.t[0] += L;
    c.t[1] += complex(0, L);
    e.t[1] += complex(0, L);
    const auto traj = isomonodromic_flow(TPath{{pc, a, c, e, pc}}, d0, flow_tol);
    r.outputs = {{"d_end", detail::darboux_json(traj.end_point())}};
    r.add("return_error", detail::max_diff(detail::flat(traj.end_point()), detail::flat(d0)), thr.flow_return);
  }));
  out.push_back(detail::guarded(i, "order-swap", [&](CaseRecord& r) {
    r.inputs = base;
    PoleConfig a = pc, bb = pc, ab = pc;
    a.t[0] += L;
    bb.t[1] += L;
    ab.t[0] += L;
    ab.t[1] += L;
    const auto one = isomonodromic_flow(TPath{{pc, a, ab}}, d0, flow_tol);
    const auto two = isomonodromic_flow(TPath{{pc, bb, ab}}, d0, flow_tol);
    r.add("endpoint_difference", detail::max_diff(detail::flat(one.end_point()), detail::flat(two.end_point())), thr.order_swap);
  }));
  return out;
}

inline CaseRecord rh_rank_record(const ExperimentConfig& cfg, std::size_t i, const PoleConfig& pc, const QuadraticDifferential& nu)
{
  return detail::guarded(i, "rank", [&](CaseRecord& r) {
    r.inputs = {{"t", detail::poles_json(pc)}, {"nu", complex_array(std::array<complex, 3>{nu.nu0, nu.nu1, nu.nu2})}};
    RhJacobianOptions opt;
    opt.rh.tol = cfg.tol_ode;
    opt.h_rel = cfg.fd_step;
    opt.rank_threshold = cfg.thresholds.rank_ratio;
    const auto res = rh_jacobian_rank(pc, nu, default_words(), opt);
    json sv = json::array();
    for (real v : res.rank.singular_values) sv.push_back(v);
    r.outputs = {{"rank", res.rank.rank}, {"singular_values", sv}};
    r.add("rank", res.rank.rank, 6, Comparison::equal);
    r.add("sigma_min_over_sigma_max", res.rank.condition_ratio(), cfg.thresholds.rank_ratio, Comparison::above);
  });
}

inline detail::CaseList rh_rank_case(const ExperimentConfig& cfg, std::size_t i)
{
  Rng rng(case_seed(cfg.seed, i));
  const auto [pc, nu] = detail::random_rh_point(rng, cfg);
  return {rh_rank_record(cfg, i, pc, nu)};
}

inline CaseRecord degeneration_record(const ExperimentConfig& cfg, std::size_t i, const PoleConfig& pc, complex nu1, complex nu2)
{
  return detail::guarded(i, "degeneration", [&](CaseRecord& r) {
    const std::array<real, 3> eps{1e-1, 1e-2, 1e-3};
    r.inputs = {{"t", detail::poles_json(pc)}, {"nu1", to_json_value(nu1)}, {"nu2", to_json_value(nu2)}, {"eps", eps}};
    RhJacobianOptions opt;
    opt.rh.tol = cfg.tol_ode;
    opt.h_rel = cfg.fd_step;
    opt.rank_threshold = cfg.thresholds.rank_ratio;
    std::vector<real> smin;
    for (real e : eps) {
      const QuadraticDifferential nu{(nu1 * nu1 - e) / (real(4) * nu2), nu1, nu2};
      smin.push_back(rh_jacobian_rank(pc, nu, default_words(), opt).rank.singular_values.back());
    }
    r.outputs = {{"sigma_min", smin}};
    r.add("monotone_decrease", (smin[0] > smin[1] && smin[1] > smin[2]) ? 1 : 0, 1, Comparison::equal);
    r.add("drop_factor", smin[0] / smin[2], cfg.thresholds.degeneration_drop, Comparison::above);
  });
}

inline detail::CaseList degeneration_case(const ExperimentConfig& cfg, std::size_t i)
{
  Rng rng(case_seed(cfg.seed ^ 0xde9e7ULL, i));
  for (;;) {
    const PoleConfig pc = sample_poles(rng, cfg.pole_box);
    const complex nu1 = uniform_complex(rng, cfg.nu_box), nu2 = uniform_complex(rng, cfg.nu_box);
    if (std::abs(nu2) < 0.3 * cfg.nu_box) continue;
    bool ok = true;
    for (real e : {1e-1, 1e-3}) {
      const QuadraticDifferential nu{(nu1 * nu1 - e) / (real(4) * nu2), nu1, nu2};
      ok = ok && detail::acceptable_nu(pc, nu, 0, 1.0);
    }
    if (ok) return {degeneration_record(cfg, i, pc, nu1, nu2)};
  }
}

inline CaseRecord riccati_record(std::size_t i, const Genus2System& g, const std::vector<Height>& heights)
{
  return detail::guarded(i, "riccati", [&](CaseRecord& r) {
    r.inputs = {{"t", detail::poles_json(g.poles)},
                {"beta", complex_array(std::array<complex, 2>{g.beta0, g.beta1})},
                {"gamma", complex_array(std::array<complex, 2>{g.gamma0, g.gamma1})}};
    json hs = json::array();
    for (std::size_t k = 0; k < heights.size(); ++k) {
      const auto pts = tangency_points(g, heights[k]);
      hs.push_back({{"p", heights[k].infinite ? json("inf") : to_json_value(heights[k].value)}, {"count", total_multiplicity(pts)}});
      r.add("tangency_count_" + std::to_string(k), total_multiplicity(pts), 2, Comparison::equal);
    }
    const auto fibers = twelve_special_fibers(g);
    const auto si = self_intersection(g);
    json fj = json::array();
    for (const auto& f : fibers)
      fj.push_back({{"w", to_string(f.w)}, {"p", f.p.infinite ? json("inf") : to_json_value(f.p.value)}, {"multiplicity", f.multiplicity}});
    r.outputs = {{"heights", hs},
                 {"special_fibers", fj},
                 {"branch_count", si.branch_count},
                 {"c1_wedge", si.c1_wedge},
                 {"self_intersection", si.value},
                 {"non_generic", si.non_generic}};
    r.add("special_fiber_multiplicity", total_multiplicity(fibers), 12, Comparison::equal);
    r.add("c1_wedge", si.c1_wedge, -2, Comparison::equal);
    r.add("self_intersection", si.value, -4, Comparison::equal);
  });
}

inline detail::CaseList riccati_case(const ExperimentConfig& cfg, std::size_t i)
{
  Rng rng(case_seed(cfg.seed, i));
  const PoleConfig pc = sample_poles(rng, cfg.pole_box);
  const Genus2System g = detail::random_genus2(rng, pc);
  std::vector<Height> hs;
  for (int k = 0; k < cfg.heights; ++k) hs.push_back(Height::at(uniform_complex(rng, 2)));
  return {riccati_record(i, g, hs)};
}

inline detail::CaseList double_cover_case(const ExperimentConfig& cfg, std::size_t i)
{
  Rng rng(case_seed(cfg.seed, i));
  const auto [pc, nu] = detail::random_rh_point(rng, cfg);
  const json base = {{"t", detail::poles_json(pc)}, {"nu", complex_array(std::array<complex, 3>{nu.nu0, nu.nu1, nu.nu2})}};
  detail::CaseList out;
  out.push_back(detail::guarded(i, "branch-swap", [&](CaseRecord& r) {
    r.inputs = base;
    RhOptions a, b;
    a.tol = b.tol = cfg.tol_ode;
    b.root_choice = 1;
    const auto ta = rh_trace_map(pc, nu, default_words(), a), tb = rh_trace_map(pc, nu, default_words(), b);
    r.outputs = {{"traces_root0", complex_array(ta)}, {"traces_root1", complex_array(tb)}};
    r.add("relative_difference", detail::rel_diff(tb, ta), cfg.thresholds.branch_swap);
  }));
  out.push_back(detail::guarded(i, "hyperelliptic", [&](CaseRecord& r) {
    r.inputs = base;
    const SigmaPoint s = section_phi(pc, nu, 0);
    const Genus2System g = phi_lift(pc, s);
    const auto rep = fuchsian_monodromy(s.system(pc), cfg.tol_ode);
    const std::vector<Word> pairs{{0, 1}, {0, 2}, {1, 3}, {2, 4}, {3, 4}};
    std::vector<complex> hyp, fuchs;
    HyperellipticOptions hopt;
    hopt.tol = cfg.tol_ode;
    int sheet_changes = 0;
    for (const auto& w : pairs) {
      const Polyline path = rep.loops.loops[static_cast<std::size_t>(w[0])].path.then(rep.loops.loops[static_cast<std::size_t>(w[1])].path);
      const auto h = hyperelliptic_continuation(g, path, 1, hopt);
      if (h.sheet != 1) ++sheet_changes;
      hyp.push_back(h.B.trace());
      fuchs.push_back(word_product(rep.M, w).trace());
    }
    const auto nu_back = det_quadratic(g);
    r.outputs = {{"hyperelliptic_traces", complex_array(hyp)}, {"fuchsian_traces", complex_array(fuchs)}};
    r.add("relative_difference", detail::rel_diff(hyp, fuchs), cfg.thresholds.hyperelliptic);
    r.add("sheet_changes", sheet_changes, 0, Comparison::equal);
    r.add("det_quadratic_error",
          detail::rel_diff({nu_back.nu0, nu_back.nu1, nu_back.nu2}, {nu.nu0, nu.nu1, nu.nu2}), cfg.thresholds.roundtrip);
  }));
  return out;
}

// ---------------------------------------------------------------------------------------------

inline Report make_report(const ExperimentConfig& cfg)
{
  Report rep;
  rep.experiment = cfg.experiment;
  rep.config = to_json(cfg);
  return rep;
}

/// Runs one of experiment_names(); module errors become failed cases.
inline Report run_experiment(const ExperimentConfig& cfg)
{
  cfg.validate();
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.experiment) == names.end())
    throw Error(ErrorCode::invalid_argument, "unknown experiment '" + cfg.experiment + "'");
  const auto start = std::chrono::steady_clock::now();
  Report rep = make_report(cfg);
  const auto n = static_cast<std::size_t>(cfg.sample_count());
  auto run = [&](std::size_t count, auto&& f) {
    auto cases = detail::run_parallel(count, cfg.threads, [&](std::size_t i) { return f(cfg, i); });
    for (auto& c : cases) rep.cases.push_back(std::move(c));
  };
  const std::string& e = cfg.experiment;
  if (e == "identities") {
    run(n, identities_case);
  } else if (e == "transversality") {
    run(n, transversality_agreement_case);
    run(static_cast<std::size_t>(cfg.reducible_samples),
        [](const ExperimentConfig& c, std::size_t i) { return transversality_locus_case(c, i, true); });
    run(static_cast<std::size_t>(cfg.generic_samples),
        [](const ExperimentConfig& c, std::size_t i) { return transversality_locus_case(c, i, false); });
  } else if (e == "monodromy-invariants") {
    run(n, monodromy_case);
  } else if (e == "isomonodromy") {
    run(n, isomonodromy_case);
  } else if (e == "riccati-geometry") {
    run(n, riccati_case);
  } else if (e == "rh-rank") {
    run(n, rh_rank_case);
    run(1, degeneration_case);
  } else if (e == "double-cover") {
    run(n, double_cover_case);
  }
  rep.finalize();
  rep.timings = {{"total_seconds", std::chrono::duration<real>(std::chrono::steady_clock::now() - start).count()}};
  return rep;
}

// ---------------------------------------------------------------------------------------------
// single-task verbs; explicit inputs come from cfg.inputs, missing ones are sampled from the seed

namespace detail
{

inline PoleConfig poles_from_json(const json& j)
{
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::invalid_argument, "t must be an array of 3 complex numbers");
  PoleConfig pc(complex_from_json(j[0]), complex_from_json(j[1]), complex_from_json(j[2]));
  pc.validate();
  return pc;
}

inline std::array<complex, 3> triple_from_json(const json& j, const char* name)
{
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::invalid_argument, std::string(name) + " must have 3 entries");
  return {complex_from_json(j[0]), complex_from_json(j[1]), complex_from_json(j[2])};
}

inline Report finish(Report rep, std::chrono::steady_clock::time_point start)
{
  rep.finalize();
  rep.timings = {{"total_seconds", std::chrono::duration<real>(std::chrono::steady_clock::now() - start).count()}};
  return rep;
}

}

/// Garnier flow from d0 along the straight path t0 -> t1, with reversibility and trace-drift checks.
/// inputs: {"t": [..], "target": [..], "q": [..], "p": [..], "samples_out": bool}
inline Report run_flow_task(const ExperimentConfig& cfg)
{
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig c = cfg;
  c.experiment = "flow";
  Report rep = make_report(c);
  rep.cases.push_back(detail::guarded(0, "flow", [&](CaseRecord& r) {
    const json& in = cfg.inputs;
    PoleConfig t0;
    DarbouxPoint d0;
    if (in.contains("t") && in.contains("q") && in.contains("p")) {
      t0 = detail::poles_from_json(in["t"]);
      d0 = {detail::triple_from_json(in["q"], "q"), detail::triple_from_json(in["p"], "p")};
    } else {
      Rng rng(case_seed(cfg.seed, 0));
      const auto s = sample_isomonodromy(rng, cfg);
      t0 = s.t;
      d0 = s.d0;
    }
    PoleConfig t1 = t0;
    if (in.contains("target"))
      t1 = detail::poles_from_json(in["target"]);
    else
      t1.t[0] += cfg.segment_length;
    const real tol = std::min(cfg.tol_ode, real(1e-11));
    const TPath path = TPath::segment(t0, t1);
    const auto fw = isomonodromic_flow(path, d0, tol);
    const auto bw = isomonodromic_flow(path.reversed(), fw.end_point(), tol);
    const complex b = default_basepoint(t0);
    const auto tr0 = detail::traces_at(t0, d0, b, cfg.tol_ode);
    const auto tr1 = detail::traces_at(fw.end_poles(), fw.end_point(), b, cfg.tol_ode);
    r.inputs = {{"t", detail::poles_json(t0)}, {"target", detail::poles_json(t1)}, {"d0", detail::darboux_json(d0)}};
    json samples = json::array();
    if (in.value("samples_out", true))
      for (const auto& s : fw.samples)
        samples.push_back({{"s", s.s}, {"t", detail::poles_json(s.t)}, {"d", detail::darboux_json(s.d)}});
    r.outputs = {{"d_end", detail::darboux_json(fw.end_point())},
                 {"samples", samples},
                 {"accepted_steps", fw.stats.accepted},
                 {"rejected_steps", fw.stats.rejected},
                 {"min_q_gap", fw.min_q_gap_seen},
                 {"traces_start", complex_array(tr0)},
                 {"traces_end", complex_array(tr1)}};
    r.add("reverse_return_error", detail::max_diff(detail::flat(bw.end_point()), detail::flat(d0)), 100 * tol * d0.scale());
    r.add("trace_drift", detail::rel_diff(tr1, tr0), cfg.thresholds.isomonodromy);
  }));
  return detail::finish(std::move(rep), start);
}

/// Tangency and special-fiber data of one normal-form system.
/// inputs: {"t": [..], "beta": [b0, b1], "gamma": [g0, g1], "heights": [p, ...]}
inline Report run_fibers_task(const ExperimentConfig& cfg)
{
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig c = cfg;
  c.experiment = "fibers";
  Report rep = make_report(c);
  Genus2System g;
  std::vector<Height> hs;
  try {
    const json& in = cfg.inputs;
    Rng rng(case_seed(cfg.seed, 0));
    if (in.contains("t") && in.contains("beta") && in.contains("gamma")) {
      g.poles = detail::poles_from_json(in["t"]);
      g.beta0 = complex_from_json(in["beta"].at(0));
      g.beta1 = complex_from_json(in["beta"].at(1));
      g.gamma0 = complex_from_json(in["gamma"].at(0));
      g.gamma1 = complex_from_json(in["gamma"].at(1));
    } else {
      g = detail::random_genus2(rng, sample_poles(rng, cfg.pole_box));
    }
    if (in.contains("heights"))
      for (const auto& h : in["heights"]) hs.push_back(h.is_string() ? Height::infinity() : Height::at(complex_from_json(h)));
    else
      for (int k = 0; k < cfg.heights; ++k) hs.push_back(Height::at(uniform_complex(rng, 2)));
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    rep.cases.push_back(detail::guarded(0, "riccati", [&](CaseRecord&) { throw Error(ErrorCode::invalid_argument, msg); }));
    return detail::finish(std::move(rep), start);
  }
  rep.cases.push_back(riccati_record(0, g, hs));
  return detail::finish(std::move(rep), start);
}

/// Rank of the Riemann-Hilbert Jacobian at one (t, nu).
/// inputs: {"t": [..], "nu": [nu0, nu1, nu2]}
inline Report run_rh_rank_task(const ExperimentConfig& cfg)
{
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig c = cfg;
  c.experiment = "rh-rank-point";
  Report rep = make_report(c);
  PoleConfig pc;
  QuadraticDifferential nu;
  try {
    const json& in = cfg.inputs;
    if (in.contains("t") && in.contains("nu")) {
      pc = detail::poles_from_json(in["t"]);
      const auto n = detail::triple_from_json(in["nu"], "nu");
      nu = {n[0], n[1], n[2]};
    } else {
      Rng rng(case_seed(cfg.seed, 0));
      std::tie(pc, nu) = detail::random_rh_point(rng, cfg);
    }
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    rep.cases.push_back(detail::guarded(0, "rank", [&](CaseRecord&) { throw Error(ErrorCode::invalid_argument, msg); }));
    return detail::finish(std::move(rep), start);
  }
  rep.cases.push_back(rh_rank_record(cfg, 0, pc, nu));
  return detail::finish(std::move(rep), start);
}

}
#endif
