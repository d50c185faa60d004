#include "qobs/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <Eigen/QR>

#include "qobs/errors.hpp"
#include "qobs/json_io.hpp"

namespace qobs {

namespace {

std::size_t step_count(double horizon, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("step must be positive and finite");
  if (!(horizon >= dt) || !std::isfinite(horizon))
    throw InvalidArgument("horizon must be finite and at least one step");
  const double ratio = horizon / dt;
  const double steps = std::round(ratio);
  if (std::abs(steps - ratio) > 1e-6)
    throw InvalidArgument("horizon must be an integer multiple of the step");
  return static_cast<std::size_t>(steps);
}

double parse_number(std::string_view text, std::string_view key) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value))
    throw InvalidArgument("drive: bad value for '" + std::string(key) + "'");
  return value;
}

}  // namespace

Complex Drive::value(double t) const {
  if (t < start || t > stop) return {0.0, 0.0};
  switch (shape) {
    case DriveShape::Constant:
    case DriveShape::Pulse:
      return amplitude;
    case DriveShape::Sinusoid:
      return amplitude * std::sin(frequency * t);
    case DriveShape::Samples: {
      if (samples.empty() || !(sample_dt > 0.0)) return {0.0, 0.0};
      const double pos = (t - start) / sample_dt;
      const auto i = static_cast<std::size_t>(std::floor(pos));
      if (i + 1 >= samples.size()) return i + 1 == samples.size() ? samples.back() : Complex{};
      const double frac = pos - static_cast<double>(i);
      return samples[i] * (1.0 - frac) + samples[i + 1] * frac;
    }
  }
  return {0.0, 0.0};
}

Drive parse_drive(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  Drive drive;
  if (kind == "const" || kind == "constant") {
    drive.shape = DriveShape::Constant;
  } else if (kind == "sin" || kind == "sinusoid") {
    drive.shape = DriveShape::Sinusoid;
  } else if (kind == "pulse") {
    drive.shape = DriveShape::Pulse;
  } else {
    throw InvalidArgument("drive: unknown shape '" + std::string(kind) + "'");
  }
  double amp = 1.0;
  double phase = 0.0;
  bool has_stop = false;
  std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument("drive: expected key=value");
    const std::string_view key = item.substr(0, eq);
    const double v = parse_number(item.substr(eq + 1), key);
    if (key == "amp") {
      amp = v;
    } else if (key == "phase") {
      phase = v;
    } else if (key == "freq") {
      drive.frequency = v;
    } else if (key == "start") {
      drive.start = v;
    } else if (key == "stop") {
      drive.stop = v;
      has_stop = true;
    } else if (key == "channel") {
      if (v < 0 || v != std::floor(v)) throw InvalidArgument("drive: channel must be a non-negative integer");
      drive.channel = static_cast<Eigen::Index>(v);
    } else {
      throw InvalidArgument("drive: unknown key '" + std::string(key) + "'");
    }
  }
  if (drive.shape == DriveShape::Pulse && !has_stop) throw InvalidArgument("drive: pulse needs stop");
  if (drive.stop < drive.start) throw InvalidArgument("drive: stop before start");
  drive.amplitude = std::polar(amp, phase);
  return drive;
}

Trajectory integrate_means(const StateSpace& ss, const CVector& initial,
                           const std::vector<Drive>& drives, double horizon, double dt) {
  ss.check_dimensions();
  const std::size_t steps = step_count(horizon, dt);
  const Eigen::Index m = ss.num_modes();
  CVector x;
  if (initial.size() == m) {
    x = double_vector(initial);
  } else if (initial.size() == 2 * m) {
    if (linalg::max_abs(initial.tail(m) - initial.head(m).conjugate()) > kDefaultTolerance)
      throw InvalidArgument("integrate_means: initial means violate conjugation symmetry");
    x = initial;
  } else {
    throw InvalidArgument("integrate_means: initial vector has the wrong length");
  }
  for (const Drive& d : drives) {
    if (d.channel < 0 || d.channel >= ss.num_inputs())
      throw InvalidArgument("integrate_means: drive targets a missing input channel");
  }

  const DoubledForm form = to_doubled(ss);
  const Eigen::Index n = ss.num_inputs();
  auto forcing = [&](double t) {
    CVector u = CVector::Zero(2 * n);
    for (const Drive& d : drives) {
      const Complex v = d.value(t);
      u(d.channel) += v;
      u(n + d.channel) += std::conj(v);
    }
    return CVector(form.b * u);
  };
  auto rhs = [&](double t, const CVector& state) -> CVector {
    if (drives.empty()) return form.a * state;
    return form.a * state + forcing(t);
  };

  Trajectory traj;
  traj.dt = dt;
  traj.times.reserve(steps + 1);
  traj.means.reserve(steps + 1);
  traj.times.push_back(0.0);
  traj.means.push_back(x);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const CVector k1 = rhs(t, x);
    const CVector k2 = rhs(t + 0.5 * dt, x + (0.5 * dt) * k1);
    const CVector k3 = rhs(t + 0.5 * dt, x + (0.5 * dt) * k2);
    const CVector k4 = rhs(t + dt, x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    traj.times.push_back(static_cast<double>(k + 1) * dt);
    traj.means.push_back(x);
  }
  return traj;
}

CMatrix vacuum_noise_loading(const StateSpace& ss) {
  const DoubledForm form = to_doubled(ss);
  return 0.5 * form.b * form.b.adjoint();
}

Trajectory integrate_covariance(const StateSpace& ss, const CMatrix& initial, double horizon,
                                double dt) {
  ss.check_dimensions();
  const std::size_t steps = step_count(horizon, dt);
  const Eigen::Index dim = 2 * ss.num_modes();
  if (initial.rows() != dim || initial.cols() != dim)
    throw InvalidArgument("integrate_covariance: initial covariance has the wrong shape");
  if (linalg::max_abs(initial - initial.adjoint()) > kDefaultTolerance)
    throw InvalidArgument("integrate_covariance: initial covariance is not Hermitian");

  const DoubledForm form = to_doubled(ss);
  const CMatrix q = vacuum_noise_loading(ss);
  const CMatrix a_adj = form.a.adjoint();
  auto rhs = [&](const CMatrix& s) -> CMatrix { return form.a * s + s * a_adj + q; };

  Trajectory traj;
  traj.dt = dt;
  CMatrix s = initial;
  traj.times.push_back(0.0);
  traj.covariances.push_back(s);
  for (std::size_t k = 0; k < steps; ++k) {
    const CMatrix k1 = rhs(s);
    const CMatrix k2 = rhs(s + (0.5 * dt) * k1);
    const CMatrix k3 = rhs(s + (0.5 * dt) * k2);
    const CMatrix k4 = rhs(s + dt * k3);
    s += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    traj.times.push_back(static_cast<double>(k + 1) * dt);
    traj.covariances.push_back(s);
  }
  return traj;
}

CMatrix steady_state_covariance(const StateSpace& ss) {
  const DoubledForm form = to_doubled(ss);
  const auto eig = linalg::eigenvalues(form.a);
  for (const Complex& l : eig) {
    if (l.real() >= -kMarginalTolerance)
      throw NotHurwitz("steady_state_covariance: drift is not Hurwitz (eigenvalue with real part " +
                       std::to_string(l.real()) + ")");
  }
  return linalg::solve_lyapunov(form.a, vacuum_noise_loading(ss));
}

CMatrix propagate_exact(const StateSpace& ss, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("propagate_exact: t must be >= 0");
  return linalg::expm(to_doubled(ss).a * t);
}

std::optional<DecayFit> fit_exponential_decay(const std::vector<double>& times,
                                              const std::vector<double>& magnitudes) {
  if (times.size() != magnitudes.size())
    throw InvalidArgument("fit_exponential_decay: size mismatch");
  const std::size_t first = times.size() / 2;
  std::vector<double> ts;
  std::vector<double> logs;
  for (std::size_t i = first; i < times.size(); ++i) {
    if (magnitudes[i] < 1e-12 || !std::isfinite(magnitudes[i])) continue;
    ts.push_back(times[i]);
    logs.push_back(std::log(magnitudes[i]));
  }
  if (ts.size() < 2) return std::nullopt;
  const double n = static_cast<double>(ts.size());
  double mt = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    ml += logs[i];
  }
  mt /= n;
  ml /= n;
  double stt = 0.0, stl = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    stl += (ts[i] - mt) * (logs[i] - ml);
  }
  if (stt == 0.0) return std::nullopt;
  const double slope = stl / stt;
  double sse = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = logs[i] - (ml + slope * (ts[i] - mt));
    sse += r * r;
  }
  return DecayFit{-slope, std::sqrt(sse / n), ts.size()};
}

std::vector<Complex> project(const Trajectory& traj, const CRowVector& selector) {
  std::vector<Complex> out;
  out.reserve(traj.means.size());
  for (const CVector& x : traj.means) {
    if (x.size() != 2 * selector.size())
      throw InvalidArgument("project: selector length does not match the mode count");
    out.push_back((selector * x.head(selector.size()))(0));
  }
  return out;
}

AnalysisReport analyze(const StateSpace& ss, const std::optional<CRowVector>& selector,
                       const Trajectory* trajectory) {
  const DoubledForm form = to_doubled(ss);
  AnalysisReport report;
  report.eigenvalues = linalg::eigenvalues(form.a);
  report.margin = -std::numeric_limits<double>::infinity();
  for (const Complex& l : report.eigenvalues) report.margin = std::max(report.margin, l.real());
  report.is_hurwitz = report.margin < -kMarginalTolerance;

  const Eigen::Index dim = form.a.rows();
  CMatrix candidates(dim, 0);
  std::vector<Complex> seen;
  for (const Complex& l : report.eigenvalues) {
    if (std::abs(l.real()) >= kMarginalTolerance) continue;
    if (std::any_of(seen.begin(), seen.end(), [&](Complex s) { return std::abs(s - l) < 1e-8; }))
      continue;
    seen.push_back(l);
    const CMatrix shifted = form.a - l * CMatrix::Identity(dim, dim);
    const CMatrix left = linalg::null_space(shifted.adjoint(), kMarginalTolerance);
    if (left.cols() == 0) continue;
    const CMatrix decoupled =
        form.b.cols() == 0 ? CMatrix(CMatrix::Identity(left.cols(), left.cols()))
                           : linalg::null_space(form.b.adjoint() * left, kMarginalTolerance);
    if (decoupled.cols() == 0) continue;
    CMatrix grown(dim, candidates.cols() + decoupled.cols());
    grown << candidates, left * decoupled;
    candidates = grown;
  }
  if (candidates.cols() > 0) {
    Eigen::HouseholderQR<CMatrix> qr(candidates);
    report.decoherence_free_basis =
        qr.householderQ() * CMatrix::Identity(dim, candidates.cols());
  } else {
    report.decoherence_free_basis = CMatrix(dim, 0);
  }

  if (selector && trajectory) {
    const auto values = project(*trajectory, *selector);
    std::vector<double> mags(values.size());
    std::transform(values.begin(), values.end(), mags.begin(), [](Complex c) { return std::abs(c); });
    report.decay = fit_exponential_decay(trajectory->times, mags);
  }
  return report;
}

nlohmann::json to_json(const AnalysisReport& report) {
  using nlohmann::json;
  json eig = json::array();
  for (const Complex& l : report.eigenvalues) eig.push_back({l.real(), l.imag()});
  json basis = json::array();
  for (Eigen::Index c = 0; c < report.decoherence_free_basis.cols(); ++c)
    basis.push_back(matrix_to_json(report.decoherence_free_basis.col(c).transpose())[0]);
  json out{{"eigenvalues", eig},
           {"margin", std::isfinite(report.margin) ? json(report.margin) : json(nullptr)},
           {"is_hurwitz", report.is_hurwitz},
           {"decoherence_free_basis", basis}};
  if (report.decay) {
    out["decay"] = {{"rate", report.decay->rate},
                    {"residual", report.decay->residual},
                    {"samples", report.decay->samples}};
  }
  return out;
}

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << ',' << buf;
}

}  // namespace

void write_csv(std::ostream& out, const Trajectory& traj, const std::vector<Probe>& probes,
               bool include_covariance) {
  const Eigen::Index m = traj.means.empty() ? 0 : traj.means.front().size() / 2;
  const Eigen::Index cov_dim =
      include_covariance && !traj.covariances.empty() ? traj.covariances.front().rows() : 0;
  out << 't';
  for (Eigen::Index i = 1; i <= m; ++i) out << ",re(x" << i << "),im(x" << i << ')';
  for (const Probe& p : probes) out << ",re(" << p.name << "),im(" << p.name << "),abs(" << p.name << ')';
  for (Eigen::Index r = 1; r <= cov_dim; ++r)
    for (Eigen::Index c = 1; c <= cov_dim; ++c)
      out << ",re(S" << r << '_' << c << "),im(S" << r << '_' << c << ')';
  out << '\n';
  if (cov_dim > 0 && traj.covariances.size() != traj.times.size())
    throw InvalidArgument("write_csv: covariance samples do not match the time grid");

  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", traj.times[k]);
    out << buf;
    if (k < traj.means.size()) {
      const CVector& x = traj.means[k];
      for (Eigen::Index i = 0; i < m; ++i) {
        put(out, x(i).real());
        put(out, x(i).imag());
      }
      for (const Probe& p : probes) {
        const Complex v = (p.weights * x.head(m))(0);
        put(out, v.real());
        put(out, v.imag());
        put(out, std::abs(v));
      }
    }
    if (cov_dim > 0) {
      const CMatrix& s = traj.covariances[k];
      for (Eigen::Index r = 0; r < cov_dim; ++r)
        for (Eigen::Index c = 0; c < cov_dim; ++c) {
          put(out, s(r, c).real());
          put(out, s(r, c).imag());
        }
    }
    out << '\n';
  }
}

}  // namespace qobs
