// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "defmag/dsf.hpp"
#include "defmag/error.hpp"
#include "defmag/hmm.hpp"
#include "defmag/magnify.hpp"
#include "defmag/pipeline.hpp"
#include "defmag/pyramid.hpp"
#include "defmag/radial_curves.hpp"
#include "defmag/report.hpp"
#include "defmag/srvf.hpp"
#include "defmag/synth.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace defmag;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------- 1

Verdict shooting_norm_identity() {
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto a = test::random_srvf(rng, 50);
    const auto b = test::random_srvf(rng, 50);
    const auto f = shooting_vector(a, b);
    worst = std::max(worst, std::abs(l2_norm(f.values) - f.theta));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-9 && secs < 1.0, "max |norm - theta| = " + fmt("%.3g", worst) + ", " + fmt("%.3f", secs) + " s"};
}

// ---------------------------------------------------------------- 2

Verdict geodesic_sanity() {
  Rng rng(102);
  double self = 0.0, anti = 0.0, asym = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto q = test::random_srvf(rng, 50);
    const auto r = test::random_srvf(rng, 50);
    Srvf neg = q;
    for (auto& v : neg.values) v = -v;
    self = std::max(self, geodesic_distance(q, q));
    anti = std::max(anti, std::abs(geodesic_distance(q, neg) - std::numbers::pi));
    asym = std::max(asym, std::abs(geodesic_distance(q, r) - geodesic_distance(r, q)));
  }
  // Single-sample SRVFs make the inner product a plain product.
  std::size_t nans = 0;
  Srvf a{{Vec3(1, 0, 0)}, false}, b{{Vec3::Zero()}, false};
  for (int i = 0; i < 1000000; ++i) {
    const double base = i % 2 == 0 ? (rng.uniform() < 0.5 ? -1.0 : 1.0) : rng.uniform(-1.0, 1.0);
    b.values[0].x() = base + (rng.uniform() < 0.5 ? -1e-12 : 1e-12);
    nans += std::isnan(geodesic_distance(a, b));
  }
  const bool ok = self == 0.0 && anti < 1e-12 && asym < 1e-12 && nans == 0;
  return {ok, "d(q,q) max " + fmt("%.3g", self) + ", |d(q,-q) - pi| max " + fmt("%.3g", anti) + ", asymmetry max " +
                  fmt("%.3g", asym) + ", NaN count " + std::to_string(nans)};
}

// ---------------------------------------------------------------- 3

TriMesh transformed(const TriMesh& m, const std::function<Vec3(const Vec3&)>& f) {
  TriMesh out = m;
  for (auto& v : out.vertices) v = f(v);
  return out;
}

double max_abs_diff(const DsfField& a, const DsfField& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    worst = std::max(worst, std::abs(a.grid.values()[i] - b.grid.values()[i]));
  }
  return worst;
}

Verdict srvf_invariances() {
  SynthSpec spec;
  spec.noise_sigma = 0.0;
  SynthSequenceInfo info;
  info.label = Expression::HA;
  const auto frames = synth_sequence(spec, 7, info);
  const TriMesh& m0 = frames.front();
  const TriMesh& m1 = frames[frames.size() / 2];
  const Vec3 nose = find_nose_tip(m0);
  const std::size_t curves = 60, samples = 50;
  auto field = [&](const TriMesh& a, const TriMesh& b, const Vec3& origin) {
    return dsf_between(extract_radial_curves(a, origin, curves, samples),
                       extract_radial_curves(b, origin, curves, samples));
  };
  const auto ref = field(m0, m1, nose);

  const Vec3 shift(37.5, -12.25, 80.0);
  auto move = [&](const Vec3& v) { return Vec3(v + shift); };
  const double trans = max_abs_diff(ref, field(transformed(m0, move), transformed(m1, move), move(nose)));

  double scale_err = 0.0;
  for (double s : {0.1, 1.0, 10.0}) {
    auto sc = [&](const Vec3& v) { return Vec3(s * v); };
    scale_err = std::max(scale_err, max_abs_diff(ref, field(transformed(m0, sc), transformed(m1, sc), sc(nose))));
  }

  Rng rng(103);
  const auto fa = extract_radial_curves(m0, nose, curves, samples);
  const auto fb = extract_radial_curves(m1, nose, curves, samples);
  double rot_err = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Matrix3d rot = test::random_rotation(rng);
    for (std::size_t k = 0; k < curves; ++k) {
      auto pa = fa.curves[k].points, pb = fb.curves[k].points;
      for (auto& p : pa) p = rot * p;
      for (auto& p : pb) p = rot * p;
      const double d0 = geodesic_distance(srvf_of_curve(fa.curves[k]), srvf_of_curve(fb.curves[k]));
      const double d1 = geodesic_distance(srvf_of_points(pa), srvf_of_points(pb));
      rot_err = std::max(rot_err, std::abs(d0 - d1));
    }
  }
  const bool ok = trans <= 1e-9 && scale_err <= 1e-7 && rot_err < 1e-9;
  return {ok, "translation " + fmt("%.3g", trans) + ", scaling " + fmt("%.3g", scale_err) + ", rotation " +
                  fmt("%.3g", rot_err)};
}

// ---------------------------------------------------------------- 4

Verdict pyramid_reconstruction() {
  const auto t0 = Clock::now();
  Rng rng(104);
  const std::pair<std::size_t, std::size_t> sizes[] = {{200, 50}, {64, 32}, {17, 9}};
  double worst = 0.0;
  int grids = 0;
  for (int i = 0; i < 100; ++i) {
    const auto [r, c] = sizes[i % 3];
    const std::size_t levels = 1 + static_cast<std::size_t>(i / 3) % 4;
    Grid g(r, c);
    for (auto& v : g.values()) v = rng.uniform(-5.0, 5.0);
    const Grid back = collapse_pyramid(build_pyramid(g, levels));
    for (std::size_t k = 0; k < g.size(); ++k) worst = std::max(worst, std::abs(back.values()[k] - g.values()[k]));
    ++grids;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 5.0,
          std::to_string(grids) + " grids, max error " + fmt("%.3g", worst) + ", " + fmt("%.3f", secs) + " s"};
}

// ---------------------------------------------------------------- 5, 6

DsfSequence tone_sequence(std::size_t n, std::size_t rows, std::size_t cols,
                          const std::function<double(std::size_t)>& value) {
  DsfSequence s;
  s.sample_rate = 25;
  for (std::size_t t = 0; t < n; ++t) {
    DsfField f{Grid(rows, cols, value(t)), static_cast<std::int64_t>(t)};
    s.frames.push_back(std::move(f));
  }
  return s;
}

double tone_amplitude(const DsfSequence& s, std::size_t site, double f) {
  std::complex<double> acc = 0.0;
  const auto n = static_cast<double>(s.num_frames());
  for (std::size_t t = 0; t < s.num_frames(); ++t) {
    acc += s.frames[t].grid.values()[site] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(t) / 25.0);
  }
  return 2.0 * std::abs(acc) / n;
}

double sine(double f, std::size_t t) { return std::sin(2.0 * std::numbers::pi * f * static_cast<double>(t) / 25.0); }

Verdict magnification_exactness() {
  const std::size_t n = 250;
  const double b = 0.4, a = 11.0 * b + 0.05;
  MagnifyConfig cfg;
  cfg.levels = 1;

  const auto in_band = tone_sequence(n, 8, 6, [&](std::size_t t) { return a + b * sine(0.3, t); });
  const auto r = magnify_sequence(in_band, cfg);
  double gain_err = 0.0;
  for (std::size_t i = 0; i < 48; ++i) {
    gain_err = std::max(gain_err, std::abs(tone_amplitude(r.sequence, i, 0.3) - 11.0 * b) / (11.0 * b));
  }

  const auto out_band = tone_sequence(n, 8, 6, [&](std::size_t t) { return a + b * sine(2.0, t); });
  const auto ro = magnify_sequence(out_band, cfg).sequence;
  double pass_err = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < 48; ++i) {
      pass_err = std::max(pass_err, std::abs(ro.frames[t].grid.values()[i] - out_band.frames[t].grid.values()[i]));
    }
  }

  Rng rng(105);
  DsfSequence noise = in_band;
  for (auto& f : noise.frames) {
    for (auto& v : f.grid.values()) v = rng.uniform(0.0, 2.0);
  }
  MagnifyConfig identity;
  identity.zeta = 0.0;
  identity.levels = 3;
  const auto rz = magnify_sequence(noise, identity).sequence;
  double id_err = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < 48; ++i) {
      id_err = std::max(id_err, std::abs(rz.frames[t].grid.values()[i] - noise.frames[t].grid.values()[i]));
    }
  }
  const bool ok = gain_err <= 1e-6 && pass_err <= 1e-9 && id_err <= 1e-12 && r.clamped == 0;
  return {ok, "in-band relative error " + fmt("%.3g", gain_err) + ", out-of-band error " + fmt("%.3g", pass_err) +
                  ", zeta=0 error " + fmt("%.3g", id_err)};
}

Verdict two_tone_attenuation() {
  const double b1 = 0.3, b2 = 0.2;
  const auto s = tone_sequence(250, 8, 6, [&](std::size_t t) { return 5.0 + b1 * sine(0.3, t) + b2 * sine(0.4, t); });
  MagnifyConfig cfg;
  cfg.levels = 1;
  cfg.gamma = 0.5;
  const auto out = magnify_sequence(s, cfg).sequence;
  const double gain = 1.0 + 0.5 * 10.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < 48; ++i) {
    worst = std::max(worst, std::abs(tone_amplitude(out, i, 0.3) - gain * b1) / (gain * b1));
    worst = std::max(worst, std::abs(tone_amplitude(out, i, 0.4) - gain * b2) / (gain * b2));
  }
  return {worst <= 1e-6, "gain " + fmt("%.1f", gain) + ", max relative error " + fmt("%.3g", worst)};
}

// ---------------------------------------------------------------- 7, 8

double brute_force(const Eigen::VectorXd& pi, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int k = static_cast<int>(pi.size()), tn = static_cast<int>(b.rows());
  int paths = 1;
  for (int t = 0; t < tn; ++t) paths *= k;
  double total = 0.0;
  for (int code = 0; code < paths; ++code) {
    int c = code, prev = -1;
    double p = 1.0;
    for (int t = 0; t < tn; ++t) {
      const int s = c % k;
      c /= k;
      p *= (prev < 0 ? pi[s] : a(prev, s)) * b(t, s);
      prev = s;
    }
    total += p;
  }
  return std::log(total);
}

Eigen::VectorXd simplex(Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (auto& e : v) e = rng.uniform(0.05, 1.0);
  return v / v.sum();
}

bool non_decreasing(const std::vector<double>& ll, double& worst_drop) {
  bool ok = true;
  for (std::size_t i = 1; i < ll.size(); ++i) {
    const double drop = ll[i - 1] - ll[i];
    worst_drop = std::max(worst_drop, drop);
    if (drop > 1e-9 * std::abs(ll[i - 1])) ok = false;
  }
  return ok;
}

struct TwoStateModel {
  Eigen::Vector2d initial{0.5, 0.5};
  Eigen::Matrix2d transition;
  Eigen::Vector2d mu0{0.0, 0.0}, mu1{2.5, -2.5};
  TwoStateModel() { transition << 0.9, 0.1, 0.2, 0.8; }
};

std::vector<ObservationSequence> sample_model(const TwoStateModel& m, Rng& rng, int count, int length) {
  std::vector<ObservationSequence> out;
  for (int s = 0; s < count; ++s) {
    ObservationSequence seq;
    int state = rng.uniform() < m.initial[0] ? 0 : 1;
    for (int t = 0; t < length; ++t) {
      if (t > 0) state = rng.uniform() < m.transition(state, 0) ? 0 : 1;
      Eigen::VectorXd o = state == 0 ? m.mu0 : m.mu1;
      for (auto& e : o) e += rng.normal();
      seq.push_back(o);
    }
    out.push_back(std::move(seq));
  }
  return out;
}

Verdict hmm_forward_correctness() {
  Rng rng(107);
  double worst = 0.0;
  int instances = 0;
  for (int k = 1; k <= 3; ++k) {
    for (int tn = 1; tn <= 6; ++tn) {
      for (int rep = 0; rep < 6; ++rep) {
        const Eigen::VectorXd pi = simplex(rng, k);
        Eigen::MatrixXd a(k, k), b(tn, k);
        for (int i = 0; i < k; ++i) a.row(i) = simplex(rng, k).transpose();
        for (auto& e : b.reshaped()) e = rng.uniform(0.01, 3.0);
        const double expect = brute_force(pi, a, b);
        const double got = forward_log_likelihood(pi.array().log(), a.array().log(), b.array().log());
        worst = std::max(worst, std::abs(got - expect));
        ++instances;
      }
    }
  }
  // Baum-Welch monotonicity on a spread of training runs.
  double drop = 0.0;
  bool monotone = true;
  int runs = 0;
  const TwoStateModel truth;
  for (int seed = 0; seed < 5; ++seed) {
    Rng data_rng(700 + static_cast<std::uint64_t>(seed));
    const auto seqs = sample_model(truth, data_rng, 30, 40);
    for (int states : {1, 2, 3}) {
      for (auto topo : {HmmTopology::LeftToRight, HmmTopology::Ergodic}) {
        HmmOptions opts;
        opts.states = states;
        opts.topology = topo;
        monotone = non_decreasing(train_gaussian_hmm(seqs, opts).log_likelihood, drop) && monotone;
        ++runs;
      }
    }
  }
  const bool ok = worst <= 1e-10 && instances >= 100 && monotone;
  return {ok, std::to_string(instances) + " instances, max error " + fmt("%.3g", worst) + "; " + std::to_string(runs) +
                  " EM runs, largest drop " + fmt("%.3g", std::max(drop, 0.0))};
}

Verdict hmm_parameter_recovery() {
  const TwoStateModel truth;
  int recovered = 0;
  double worst = 0.0;
  for (int seed = 1; seed <= 5; ++seed) {
    Rng rng(800 + static_cast<std::uint64_t>(seed));
    const auto seqs = sample_model(truth, rng, 200, 50);
    HmmOptions opts;
    opts.states = 2;
    opts.topology = HmmTopology::Ergodic;
    const auto fit = train_gaussian_hmm(seqs, opts).model;
    const double direct = (fit.transition - truth.transition).cwiseAbs().maxCoeff();
    Eigen::Matrix2d swapped;
    swapped << fit.transition(1, 1), fit.transition(1, 0), fit.transition(0, 1), fit.transition(0, 0);
    const double relabeled = (swapped - truth.transition).cwiseAbs().maxCoeff();
    const double err = std::min(direct, relabeled);
    worst = std::max(worst, err);
    recovered += err <= 0.05;
  }
  return {recovered == 5, std::to_string(recovered) + "/5 seeds, max entry error " + fmt("%.4f", worst)};
}

// ---------------------------------------------------------------- 9, 10

PipelineConfig benefit_config(std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.synth = SynthSpec::subtle();
  cfg.seed = seed;
  return cfg;
}

struct BenefitRun {
  double svm_wv = 0, svm_mwv = 0, hmm_wv = 0, hmm_mwv = 0;
};

// Runs the full pipeline (HMM reports under dir) and SVM on the same
// fields (reports under dir/svm).
BenefitRun run_benefit(std::uint64_t seed, const fs::path& dir) {
  auto cfg = benefit_config(seed);
  cfg.classifier = ClassifierKind::Hmm;
  RunOptions opts;
  opts.compare = true;
  opts.output = dir;
  const auto report = run_pipeline(cfg, opts);

  RunReport svm;
  svm.dataset = report.dataset;
  for (const auto& c : report.conditions) {
    ConditionResult r = c;
    r.cv = evaluate(c.magnified ? report.dataset.mwv : report.dataset.wv, report.dataset.labels,
                    report.dataset.subjects, cfg, ClassifierKind::Svm);
    svm.conditions.push_back(std::move(r));
  }
  export_report(dir / "svm", svm);

  BenefitRun out;
  for (const auto& c : report.conditions) (c.magnified ? out.hmm_mwv : out.hmm_wv) = c.cv.mean_accuracy;
  for (const auto& c : svm.conditions) (c.magnified ? out.svm_mwv : out.svm_wv) = c.cv.mean_accuracy;
  return out;
}

const fs::path& work_root() {
  static const fs::path root = test::temp_dir("acceptance");
  return root;
}

Verdict magnification_benefit() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream detail;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto r = run_benefit(seed, work_root() / ("seed" + std::to_string(seed)));
    const bool seed_ok = r.svm_mwv - r.svm_wv >= 5.0 && r.hmm_mwv - r.hmm_wv >= 5.0;
    ok = ok && seed_ok;
    detail << "seed " << seed << ": SVM " << fmt("%.1f", r.svm_wv) << "->" << fmt("%.1f", r.svm_mwv) << ", HMM "
           << fmt("%.1f", r.hmm_wv) << "->" << fmt("%.1f", r.hmm_mwv) << "; ";
  }
  const double secs = seconds_since(t0);
  detail << fmt("%.0f", secs) << " s";
  return {ok && secs < 600.0, detail.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const auto first = work_root() / "seed1";
  if (!fs::exists(first / "summary.csv")) run_benefit(1, first);
  const auto second = work_root() / "seed1_rerun";
  run_benefit(1, second);
  std::size_t files = 0, differing = 0, reports = 0;
  for (const auto& e : fs::recursive_directory_iterator(first)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), first);
    ++files;
    reports += rel.extension() == ".csv";
    if (!fs::exists(second / rel) || slurp(e.path()) != slurp(second / rel)) ++differing;
  }
  std::size_t second_files = 0;
  for (const auto& e : fs::recursive_directory_iterator(second)) second_files += e.is_regular_file();
  const bool ok = differing == 0 && files == second_files && reports >= 14;
  return {ok, std::to_string(files) + " files (" + std::to_string(reports) + " reports), " + std::to_string(differing) +
                  " differ"};
}

// ---------------------------------------------------------------- 11

Verdict dsf_round_trip() {
  Rng rng(111);
  int identical = 0;
  for (int i = 0; i < 20; ++i) {
    DsfSequence s;
    s.sample_rate = static_cast<std::uint32_t>(1 + rng.index(120));
    const std::size_t n = 1 + rng.index(10), rows = 1 + rng.index(30), cols = 1 + rng.index(30);
    for (std::size_t t = 0; t < n; ++t) {
      DsfField f{Grid(rows, cols), static_cast<std::int64_t>(t)};
      for (auto& v : f.grid.values()) v = rng.uniform(0.0, 1.0) * std::pow(10.0, rng.uniform(-20.0, 20.0));
      s.frames.push_back(std::move(f));
    }
    const auto path = work_root() / ("rt" + std::to_string(i) + ".dsf");
    const auto path2 = work_root() / ("rt" + std::to_string(i) + "_again.dsf");
    save_dsf(path, s);
    save_dsf(path2, load_dsf(path));
    identical += slurp(path) == slurp(path2);
  }
  return {identical == 20, std::to_string(identical) + "/20 byte-identical"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {1, "shooting-norm identity", shooting_norm_identity},
      {2, "geodesic sanity", geodesic_sanity},
      {3, "SRVF invariances", srvf_invariances},
      {4, "pyramid reconstruction", pyramid_reconstruction},
      {5, "magnification exactness", magnification_exactness},
      {6, "two-tone attenuation", two_tone_attenuation},
      {7, "HMM forward correctness", hmm_forward_correctness},
      {8, "HMM parameter recovery", hmm_parameter_recovery},
      {9, "end-to-end magnification benefit", magnification_benefit},
      {10, "determinism", determinism},
      {11, "DSF1 round trip", dsf_round_trip},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("[%s] %2d %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
