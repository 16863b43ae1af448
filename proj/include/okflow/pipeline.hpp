#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

#include "okflow/blocks.hpp"
#include "okflow/config.hpp"
#include "okflow/fourier_scb.hpp"
#include "okflow/integrator.hpp"

namespace okflow {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- inclusion

struct IndexSlack {
  long index = 0;  // frame or standard index, -1 for the tail
  double slack = 0.0;  // distance from the inner hull to the outer boundary, negative when outside
};

struct InclusionResult {
  bool ok = false;
  long pending = 0;  // coordinates not yet inside
  long first_fail = 0;
  std::string reason;
  std::vector<IndexSlack> slack;
  explicit operator bool() const { return ok; }
};

namespace detail {

inline double slack_of(const Interval& a, const Interval& b) {
  return std::min(rnd::sub_down(a.lo(), b.lo()), rnd::sub_down(b.hi(), a.hi()));
}

// Compares y (inner coordinates 1..n in the outer's frame) and the inner's
// standard coordinates beyond n against outer, counting every failure.
inline InclusionResult count_outside(const IVector& y, const ScbSet& inner, const ScbSet& outer) {
  InclusionResult r;
  const std::size_t n = y.size();
  const std::size_t Mmax = std::max({inner.M(), outer.M(), n});
  auto record = [&](long k, const Interval& a, const Interval& b) {
    double s = slack_of(a, b);
    r.slack.push_back({k, s});
    if (!b.contains(a)) {
      if (r.pending++ == 0) {
        r.first_fail = k;
        std::ostringstream os;
        os << "coordinate " << k << " = " << a << " not inside " << b;
        r.reason = os.str();
      }
    }
  };
  for (std::size_t k = 1; k <= Mmax; ++k) {
    Interval a = k <= n ? y[k - 1] : inner.coeff(static_cast<long>(k));
    record(static_cast<long>(k), a, outer.coeff(static_cast<long>(k)));
  }
  const TailBound& ti = inner.tail;
  const TailBound& to = outer.tail;
  if (ti.C != 0) {
    double K = static_cast<double>(Mmax + 1);
    double rhs = ti.s >= to.s && ti.q % to.q == 0 ? rnd::mul_down(to.C, pow_down(K, ti.s - to.s)) : -1.0;
    r.slack.push_back({-1, rhs < 0 ? -rnd::inf : rnd::sub_down(rhs, ti.C)});
    if (ti.C > rhs) {
      if (r.pending++ == 0) {
        r.first_fail = -1;
        r.reason = "tail C=" + format_double(ti.C) + " exceeds " + format_double(rhs);
      }
    }
  }
  r.ok = r.pending == 0;
  return r;
}

}  // namespace detail

// Final enclosure (standard coordinates) against a block, converted into the
// block's frame with interval arithmetic.
inline InclusionResult check_inclusion(const ScbSet& final_set, const Block& target) {
  const ScbSet& outer = target.set;
  if (final_set.frame) throw std::invalid_argument("check_inclusion: final set must be in standard coordinates");
  if (!outer.frame) return detail::count_outside(IVector(), final_set, outer);
  ScbSet inner = to_frame(final_set, outer.frame);
  IVector y(outer.frame->dim());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = inner.finite[i];
  return detail::count_outside(y, final_set, outer);
}

// Lohner form: y = Pinv_1 (xbar - c) + (Pinv_1 C) r0 + Pinv_1 r + Pinv_2 (x_mid - c),
// with Pinv_1 the columns of the Lohner modes, avoiding the wrapping of the hull.
inline InclusionResult check_inclusion(const LohnerSet& S, const Block& target) {
  const ScbSet& outer = target.set;
  if (!outer.frame || outer.frame->dim() < S.m()) return check_inclusion(S.to_scb(), target);
  const Frame& f = *outer.frame;
  const std::size_t n = f.dim(), m = S.m();
  ScbSet std_set = S.to_scb();
  IMatrix P1(n, m);
  IVector d1(m);
  for (std::size_t j = 0; j < m; ++j) d1[j] = Interval(S.xbar[j]) - Interval(f.center[j]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) P1(i, j) = f.Pinv(i, j);
  IVector y = mat_vec(P1, d1) + mat_vec(P1 * S.C, S.r0) + mat_vec(P1, S.r);
  for (std::size_t j = m; j < n; ++j) {
    Interval d = std_set.coeff(static_cast<long>(j + 1)) - Interval(f.center[j]);
    if (d.is_zero()) continue;
    for (std::size_t i = 0; i < n; ++i) y[i] += f.Pinv(i, j) * d;
  }
  return detail::count_outside(y, std_set, outer);
}

// ------------------------------------------------------------------- output

// Text sink writing either a plain file or a gzip stream.
class LogFile {
 public:
  LogFile(const std::string& path, bool gzip) : gzip_(gzip) {
    if (gzip_) {
      gz_ = gzopen((path + ".gz").c_str(), "wb");
      if (!gz_) throw IoError("cannot write " + path + ".gz");
    } else {
      out_.open(path);
      if (!out_) throw IoError("cannot write " + path);
    }
  }
  ~LogFile() { flush(); if (gz_) gzclose(gz_); }
  LogFile(const LogFile&) = delete;
  LogFile& operator=(const LogFile&) = delete;

  std::ostream& stream() { return gzip_ ? static_cast<std::ostream&>(buf_) : out_; }
  // Moves buffered text into the gzip stream.
  void flush() {
    if (!gzip_) {
      out_.flush();
      return;
    }
    std::string s = buf_.str();
    if (!s.empty() && gzwrite(gz_, s.data(), static_cast<unsigned>(s.size())) == 0) throw IoError("gzip write failed");
    buf_.str("");
  }

 private:
  bool gzip_;
  gzFile gz_ = nullptr;
  std::ofstream out_;
  std::ostringstream buf_;
};

// Reads a plain or gzip-compressed text file.
inline std::string read_text_file(const std::string& path) {
  gzFile g = gzopen(path.c_str(), "rb");
  if (!g) throw IoError("cannot read " + path);
  std::string s;
  char buf[1 << 15];
  int got;
  while ((got = gzread(g, buf, sizeof buf)) > 0) s.append(buf, static_cast<std::size_t>(got));
  gzclose(g);
  if (got < 0) throw IoError("read error in " + path);
  return s;
}

// ------------------------------------------------------------------- report

struct StageRecord {
  std::string name;
  bool ok = false;
  double seconds = 0.0;
  std::string detail;
};

struct ProofReport {
  std::string name;
  std::string config_echo;
  std::vector<StageRecord> stages;
  double unstable_epsilon = -rnd::inf;
  bool unstable_isolation = false;
  std::vector<long> exits;
  double stable_epsilon = -rnd::inf;
  bool stable_isolation = false;
  double center_residual = rnd::inf;
  std::vector<double> center;
  bool inclusion = false;
  long inclusion_step = -1;
  double inclusion_time = -1.0;
  long steps_done = 0;
  long last_pending = -1;
  ScbSet final_set;
  std::string failed_stage;
  std::string note;
  double seconds = 0.0;

  bool pass() const { return unstable_epsilon > 0 && unstable_isolation && stable_epsilon > 0 && inclusion; }
};

inline void write_report(std::ostream& os, const ProofReport& r) {
  os << "# proof report\n";
  os << "case=" << r.name << '\n';
  os << "[config]\n" << r.config_echo << "[stages]\n";
  for (const auto& s : r.stages)
    os << "stage=" << s.name << " status=" << (s.ok ? "ok" : "fail") << " seconds=" << format_double(s.seconds)
       << (s.detail.empty() ? "" : " " + s.detail) << '\n';
  os << "[result]\n";
  os << "unstable_epsilon=" << format_double(r.unstable_epsilon) << '\n';
  os << "unstable_isolation=" << (r.unstable_isolation ? "pass" : "fail") << '\n';
  os << "exits=";
  for (std::size_t i = 0; i < r.exits.size(); ++i) os << (i ? "," : "") << r.exits[i];
  os << '\n';
  os << "stable_epsilon=" << format_double(r.stable_epsilon) << '\n';
  os << "stable_isolation=" << (r.stable_isolation ? "pass" : "fail") << '\n';
  os << "center_residual=" << format_double(r.center_residual) << '\n';
  os << "inclusion=" << (r.inclusion ? "true" : "false") << '\n';
  os << "inclusion_step=" << r.inclusion_step << '\n';
  os << "inclusion_time=" << format_double(r.inclusion_time) << '\n';
  os << "steps_done=" << r.steps_done << '\n';
  os << "last_pending=" << r.last_pending << '\n';
  if (!r.failed_stage.empty()) os << "failed_stage=" << r.failed_stage << '\n';
  if (!r.note.empty()) os << "note=" << r.note << '\n';
  os << "seconds=" << format_double(r.seconds) << '\n';
  os << "[final_set]\n";
  write_scb(os, r.final_set);
  os << "verdict=" << (r.pass() ? "pass" : "fail") << '\n';
}

// ------------------------------------------------------------------- prove

struct ProveOptions {
  std::string output_dir;  // empty: no files written
  std::ostream* progress = nullptr;  // optional human-readable progress
};

inline std::vector<double> load_center(const Config& c, const OkParams& p, double* residual) {
  std::string path = c.resolve(c.fixed_point);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open fixed-point file " + path);
  std::vector<double> guess = read_fixed_point(in, static_cast<std::size_t>(c.center_modes));
  std::vector<double> a = numeric_fixed_point(guess, p);
  if (residual) *residual = galerkin_residual(a, p);
  return a;
}

inline ProofReport prove(const Config& c, const ProveOptions& opt = {}) {
  using clock = std::chrono::steady_clock;
  auto t_start = clock::now();
  ProofReport rep;
  rep.name = c.name;
  rep.config_echo = to_string(c);
  rep.note = "the -sign connection follows from the u -> -u and reflection symmetries";
  const OkParams p = c.params();

  std::filesystem::path dir;
  if (!opt.output_dir.empty()) {
    dir = std::filesystem::path(opt.output_dir) / c.name;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());
  }
  auto say = [&](const std::string& s) {
    if (opt.progress && c.verbosity > 0) *opt.progress << "[" << c.name << "] " << s << std::endl;
  };
  auto write_file = [&](const std::string& name, auto&& body) {
    if (dir.empty()) return;
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    body(out);
  };
  auto finish = [&] {
    rep.seconds = std::chrono::duration<double>(clock::now() - t_start).count();
    write_file("report.txt", [&](std::ostream& os) { write_report(os, rep); });
    return rep;
  };
  bool gating = true;
  // Runs one stage; false when it failed or threw.
  auto stage = [&](const std::string& name, auto&& body) {
    StageRecord s;
    s.name = name;
    auto t0 = clock::now();
    try {
      s.ok = body(s.detail);
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      s.ok = false;
      s.detail = std::string("error: ") + e.what();
    }
    s.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    rep.stages.push_back(s);
    say(name + (s.ok ? " ok " : " FAILED ") + s.detail);
    if (!s.ok && gating) rep.failed_stage = name;
    return s.ok;
  };

  // Step 1: unstable block around the origin.
  Block ub;
  ConeResult ucone;
  if (!stage("build_unstable_block", [&](std::string& d) {
        ub = build_unstable_block(p, c.unstable_spec());
        d = "M=" + std::to_string(ub.set.M()) + " tailC=" + format_double(ub.set.tail.C);
        return true;
      }))
    return finish();
  if (!stage("cone_condition_unstable", [&](std::string& d) {
        ucone = verify_cone_condition(ub, p);
        rep.unstable_epsilon = ucone.epsilon;
        d = "epsilon=" + format_double(ucone.epsilon) + " worst_k=" + std::to_string(ucone.worst_k);
        if (!ucone.ok) d += " " + ucone.reason;
        return ucone.ok;
      })) {
    write_file("unstable_box_log.txt", [&](std::ostream& os) { write_block_report(os, ub, ucone, IsolationResult{}); });
    return finish();
  }
  IsolationResult uiso;
  bool iso_ok = stage("isolation_unstable", [&](std::string& d) {
    uiso = verify_isolation(ub, p);
    rep.unstable_isolation = uiso.ok;
    rep.exits = uiso.exits;
    d = "exits=";
    for (std::size_t i = 0; i < uiso.exits.size(); ++i) d += (i ? "," : "") + std::to_string(uiso.exits[i]);
    if (!uiso.ok) d += " " + uiso.reason;
    return uiso.ok;
  });
  write_file("unstable_box_log.txt", [&](std::ostream& os) { write_block_report(os, ub, ucone, uiso); });
  if (!iso_ok) return finish();
  ScbSet face;
  if (!stage("extract_exit_face", [&](std::string& d) {
        face = extract_exit_face(ub, c.elongation, c.face_sign);
        d = "q=" + std::to_string(c.elongation) + " sign=" + std::to_string(c.face_sign);
        return true;
      }))
    return finish();

  // Step 2: stable block around the target equilibrium.
  std::vector<double> center;
  if (!stage("fixed_point", [&](std::string& d) {
        center = load_center(c, p, &rep.center_residual);
        rep.center = center;
        d = "residual=" + format_double(rep.center_residual) + " modes=" + std::to_string(center.size());
        return rep.center_residual < 1e-12;
      }))
    return finish();
  Block sb;
  ConeResult scone;
  if (!stage("build_stable_block", [&](std::string& d) {
        sb = build_stable_block(center, c.stable_spec(), p);
        d = "frame_dim=" + std::to_string(sb.set.frame->dim()) + " M=" + std::to_string(sb.set.M()) +
            " tailC=" + format_double(sb.set.tail.C);
        return true;
      }))
    return finish();
  bool ln_ok = stage("log_norm_stable", [&](std::string& d) {
    scone = verify_log_norm(sb, p);
    rep.stable_epsilon = scone.epsilon;
    d = "epsilon=" + format_double(scone.epsilon) + " worst_k=" + std::to_string(scone.worst_k);
    if (!scone.ok) d += " " + scone.reason;
    return scone.ok;
  });
  IsolationResult siso;
  if (ln_ok) {
    // reported only; forward invariance already follows from the log norm
    gating = false;
    stage("isolation_stable", [&](std::string& d) {
      siso = verify_isolation(sb, p);
      rep.stable_isolation = siso.ok;
      d = siso.ok ? "all faces inward" : siso.reason;
      return siso.ok;
    });
    gating = true;
  }
  write_file("stable_box_log.txt", [&](std::ostream& os) { write_block_report(os, sb, scone, siso); });
  if (!ln_ok) return finish();

  // Step 3: integrate the exit face until it lies inside the stable block.
  std::unique_ptr<LogFile> log;
  if (!dir.empty()) log = std::make_unique<LogFile>((dir / "num_integration_log.txt").string(), c.gzip);
  std::optional<StepLog> steplog;
  if (log) {
    steplog.emplace(log->stream(), 100);
    steplog->header();
  }
  InclusionResult last;
  stage("integrate", [&](std::string& d) {
    auto observer = [&](const LohnerSet& S, StepReport& r) {
      bool stop = false;
      if (r.step >= c.warmup_steps) {
        last = check_inclusion(S, sb);
        r.pending = last.pending;
        rep.last_pending = last.pending;
        if (last.ok && rep.inclusion_step < 0) {
          rep.inclusion = true;
          rep.inclusion_step = r.step;
          rep.inclusion_time = r.time;
          stop = c.early_stop;
        }
      }
      if (steplog) {
        steplog->write(r);
        log->flush();
      }
      if (c.verbosity > 1 && r.step % 100 == 0)
        say("step " + std::to_string(r.step) + " maxwidth=" + format_double(r.maxwidth) +
            " pending=" + std::to_string(r.pending));
      return stop;
    };
    IntegrationResult res;
    try {
      res = integrate(face, c.steps, p, c.integrator(), observer);
    } catch (const StepError& e) {
      d = std::string("error: ") + e.what();
      return false;
    }
    rep.steps_done = res.steps_done;
    rep.final_set = res.final_set;
    d = "steps=" + std::to_string(res.steps_done) + " T=" + format_double(static_cast<double>(res.steps_done) * c.h);
    return true;
  });
  if (!rep.failed_stage.empty()) return finish();
  stage("inclusion", [&](std::string& d) {
    if (rep.inclusion) {
      d = "attained at step " + std::to_string(rep.inclusion_step) + " T=" + format_double(rep.inclusion_time);
    } else {
      d = "pending=" + std::to_string(last.pending) + " first=" + std::to_string(last.first_fail) + " " + last.reason;
    }
    return rep.inclusion;
  });
  return finish();
}

}  // namespace okflow
