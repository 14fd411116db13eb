#include "aoi/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "aoi/errors.hpp"
#include "aoi/parallel.hpp"

namespace aoi::sim {

namespace {

using Rng = std::mt19937_64;

constexpr std::uint32_t kPacketStream = 1;
constexpr std::uint32_t kChannelStream = 2;
constexpr std::uint32_t kEnvelopeStream = 3;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Exact phasor re-evaluation interval; bounds drift of the rotation recursion.
constexpr std::uint64_t kResyncSteps = 1024;
constexpr double kWarmupDopplerPeriods = 100.0;
constexpr double kDefaultStepsPerPacket = 16.0;

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

SimResult summarize(const std::vector<double>& replicates, std::uint64_t n_samples, std::uint64_t seed) {
  SimResult r;
  r.n_samples = n_samples;
  r.seed = seed;
  const double count = static_cast<double>(replicates.size());
  double sum = 0.0;
  for (double v : replicates) {
    if (!std::isfinite(v)) r.divergence_detected = true;
    sum += v;
  }
  if (r.divergence_detected) {
    r.estimate = std::numeric_limits<double>::infinity();
    r.std_error = std::numeric_limits<double>::infinity();
    return r;
  }
  r.estimate = sum / count;
  double ss = 0.0;
  for (double v : replicates) ss += (v - r.estimate) * (v - r.estimate);
  r.std_error = std::sqrt(ss / (count - 1.0) / count);
  return r;
}

// ---------------------------------------------------------------- packets

struct PacketReplicate {
  double aoi = 0.0;
  double paoi = 0.0;
  double y = 0.0;
  double z = 0.0;
  double x = 0.0;
  std::vector<std::uint64_t> histogram;
};

// Transmission slots until the next success, with the M-cap rule applied to
// the per-packet attempt counter. Returns (Y~, Z~).
std::pair<std::uint64_t, std::uint64_t> next_cycle(double p, MaxTx max_tx, Rng& rng) {
  std::uint64_t slots = 0;
  std::uint64_t attempts = 0;
  for (;;) {
    ++slots;
    ++attempts;
    if (uniform01(rng) >= p) return {slots, attempts};
    if (!max_tx.is_unbounded() && attempts == max_tx.count()) attempts = 0;  // fresh packet
  }
}

PacketReplicate run_packet_replicate(double p, const AoiParams& params, std::uint64_t receptions, Rng& rng) {
  const double t = params.t_packet_s;
  const double a = params.a;
  PacketReplicate rep;
  rep.histogram.assign(kHistogramBins, 0);

  // Age carried into the first measured cycle.
  std::uint64_t z_prev = next_cycle(p, params.max_tx, rng).second;

  double area = 0.0;
  double peaks = 0.0;
  double slots_total = 0.0;
  double z_total = 0.0;
  double x_total = 0.0;
  for (std::uint64_t i = 0; i < receptions; ++i) {
    const auto [y, z] = next_cycle(p, params.max_tx, rng);
    const double span = t * static_cast<double>(z_prev + y);
    // Q_i = G(Z_{i-1} + Y_i) - G(Z_i) with G the antiderivative of C.
    try {
      area += cost_integral(span, a) - cost_integral(t * static_cast<double>(z), a);
      peaks += cost(span, a);
    } catch (const OverflowError&) {
      area = peaks = std::numeric_limits<double>::infinity();
    }
    slots_total += static_cast<double>(y);
    z_total += static_cast<double>(z);
    x_total += static_cast<double>(z_prev + y) - static_cast<double>(z);
    ++rep.histogram[std::min<std::uint64_t>(z, kHistogramBins) - 1];
    z_prev = z;
  }
  const double n = static_cast<double>(receptions);
  rep.aoi = area / (t * slots_total);
  rep.paoi = peaks / n;
  rep.y = slots_total / n;
  rep.z = z_total / n;
  rep.x = x_total / n;
  return rep;
}

// --------------------------------------------------------------- channel

// N independent branches, each a static-phase LoS term plus S diffuse
// sinusoids with jittered-uniform arrival angles and random phases. Phasors
// are advanced by complex rotation and periodically re-evaluated exactly.
class SosChannel {
 public:
  SosChannel(const channel::FadingParams& fp, int n_sinusoids, Rng& rng)
      : branches_(fp.n_antennas), sinusoids_(n_sinusoids) {
    const double k = fp.rician_k;
    const double los_amp = std::sqrt(k / (k + 1.0));
    diffuse_amp_ = std::sqrt(1.0 / ((k + 1.0) * n_sinusoids));
    const std::size_t total = static_cast<std::size_t>(branches_) * sinusoids_;
    omega_.resize(total);
    phase_.resize(total);
    re_.resize(total);
    im_.resize(total);
    rot_re_.resize(total);
    rot_im_.resize(total);
    los_re_.resize(branches_);
    los_im_.resize(branches_);
    for (int b = 0; b < branches_; ++b) {
      // LoS arrives broadside: no Doppler shift, random but fixed phase.
      const double los_phase = kTwoPi * uniform01(rng);
      los_re_[b] = los_amp * std::cos(los_phase);
      los_im_[b] = los_amp * std::sin(los_phase);
      for (int s = 0; s < sinusoids_; ++s) {
        const double angle = kTwoPi * (s + uniform01(rng)) / sinusoids_ - std::numbers::pi;
        omega_[index(b, s)] = kTwoPi * fp.doppler_hz * std::cos(angle);
        phase_[index(b, s)] = kTwoPi * uniform01(rng);
      }
    }
  }

  void set_step(double dt) {
    for (std::size_t i = 0; i < omega_.size(); ++i) {
      rot_re_[i] = std::cos(omega_[i] * dt);
      rot_im_[i] = std::sin(omega_[i] * dt);
    }
  }

  void evaluate_at(double t) {
    for (std::size_t i = 0; i < omega_.size(); ++i) {
      const double arg = omega_[i] * t + phase_[i];
      re_[i] = diffuse_amp_ * std::cos(arg);
      im_[i] = diffuse_amp_ * std::sin(arg);
    }
  }

  void advance() {
    const std::size_t total = omega_.size();
    for (std::size_t i = 0; i < total; ++i) {
      const double r = re_[i] * rot_re_[i] - im_[i] * rot_im_[i];
      const double m = re_[i] * rot_im_[i] + im_[i] * rot_re_[i];
      re_[i] = r;
      im_[i] = m;
    }
  }

  std::complex<double> gain(int b) const {
    double sr = los_re_[b];
    double si = los_im_[b];
    const std::size_t base = static_cast<std::size_t>(b) * sinusoids_;
    for (int s = 0; s < sinusoids_; ++s) {
      sr += re_[base + s];
      si += im_[base + s];
    }
    return {sr, si};
  }

  /// Sum over branches of |h_b|^2.
  double combined_power() const {
    double total = 0.0;
    for (int b = 0; b < branches_; ++b) total += std::norm(gain(b));
    return total;
  }

 private:
  std::size_t index(int b, int s) const { return static_cast<std::size_t>(b) * sinusoids_ + s; }

  int branches_;
  int sinusoids_;
  double diffuse_amp_ = 0.0;
  std::vector<double> omega_, phase_, re_, im_, rot_re_, rot_im_, los_re_, los_im_;
};

struct ChannelReplicate {
  double cdf = 0.0;
  double lcr = 0.0;
  double pep = 0.0;
  std::uint64_t samples = 0;
};

ChannelReplicate run_static_replicate(const channel::FadingParams& fp, double gamma_th, const SimConfig& cfg,
                                      Rng& rng) {
  std::uint64_t below = 0;
  for (std::uint64_t i = 0; i < cfg.n_packets; ++i) {
    SosChannel ch(fp, cfg.n_sinusoids, rng);
    ch.evaluate_at(0.0);
    if (fp.avg_snr * ch.combined_power() < gamma_th) ++below;
  }
  const double f = static_cast<double>(below) / static_cast<double>(cfg.n_packets);
  return {f, 0.0, f, cfg.n_packets};
}

struct StepPlan {
  double dt;
  std::uint64_t steps_per_window;
  std::uint64_t windows;
};

StepPlan plan_steps(double doppler_hz, double t_packet, const SimConfig& cfg) {
  // Default step also resolves fades shorter than a packet; at T_p/2 the
  // window rule misses ~10% of packet errors.
  const double default_dt = std::min(1.0 / (64.0 * doppler_hz), t_packet / kDefaultStepsPerPacket);
  const double dt_req = cfg.time_step_s > 0.0 ? cfg.time_step_s : default_dt;
  const auto per_window = static_cast<std::uint64_t>(std::ceil(t_packet / dt_req * (1.0 - 1e-12)));
  StepPlan plan;
  plan.steps_per_window = std::max<std::uint64_t>(1, per_window);
  plan.dt = t_packet / static_cast<double>(plan.steps_per_window);
  plan.windows = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(cfg.sim_duration_s / t_packet)));
  return plan;
}

ChannelReplicate run_dynamic_replicate(const channel::FadingParams& fp, double gamma_th, const SimConfig& cfg, const StepPlan& plan, Rng& rng) {
  SosChannel ch(fp, cfg.n_sinusoids, rng);
  ch.set_step(plan.dt);
  const double t0 = kWarmupDopplerPeriods / fp.doppler_hz;
  // Normalized threshold on sum |h|^2.
  const double level = gamma_th / fp.avg_snr;

  ch.evaluate_at(t0 - plan.dt);
  bool prev_below = ch.combined_power() < level;

  std::uint64_t below_count = 0;
  std::uint64_t crossings = 0;
  std::uint64_t failed_windows = 0;
  const std::uint64_t total = plan.windows * plan.steps_per_window;
  // A window spans samples [w s, (w+1) s]; the closing sample is shared with
  // the next window.
  bool window_failed = false;
  for (std::uint64_t step = 0; step <= total; ++step) {
    if (step % kResyncSteps == 0) {
      ch.evaluate_at(t0 + static_cast<double>(step) * plan.dt);
    } else {
      ch.advance();
    }
    const bool below = ch.combined_power() < level;
    if (step > 0 && step % plan.steps_per_window == 0) {
      failed_windows += window_failed || below;
      window_failed = false;
    }
    if (step == total) break;
    below_count += below;
    crossings += below && !prev_below;
    window_failed = window_failed || below;
    prev_below = below;
  }
  const std::uint64_t step = total;
  const double samples = static_cast<double>(step);
  return {static_cast<double>(below_count) / samples, static_cast<double>(crossings) / (samples * plan.dt),
          static_cast<double>(failed_windows) / static_cast<double>(plan.windows), step};
}

}  // namespace

std::mt19937_64 replication_rng(std::uint64_t seed, std::uint64_t index, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream};
  return std::mt19937_64(seq);
}

void SimConfig::validate_packet() const {
  if (n_packets < 1) throw DomainError("n_packets must be >= 1");
  if (replication_count < 2) throw DomainError("replication_count must be >= 2 (standard errors need replicates)");
}

void SimConfig::validate_channel(double doppler_hz) const {
  if (replication_count < 2) throw DomainError("replication_count must be >= 2 (standard errors need replicates)");
  if (n_sinusoids < 32) throw DomainError("n_sinusoids must be >= 32");
  if (!(time_step_s >= 0.0)) throw DomainError("time_step_s must be >= 0");
  if (doppler_hz > 0.0) {
    if (!(sim_duration_s > 0.0)) throw DomainError("sim_duration_s must be > 0 when doppler_hz > 0");
    if (time_step_s > 1.0 / (64.0 * doppler_hz) * (1.0 + 1e-12)) {
      throw DomainError("time_step_s exceeds 1/(64 f_D) = " + std::to_string(1.0 / (64.0 * doppler_hz)));
    }
  } else if (n_packets < 1) {
    throw DomainError("n_packets must be >= 1 for a static channel");
  }
}

PacketSimOutput simulate_packet_process(double p, const AoiParams& params, const SimConfig& cfg) {
  params.validate();
  cfg.validate_packet();
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("packet simulation needs 0 <= p < 1");

  std::vector<PacketReplicate> reps(cfg.replication_count);
  parallel_for(reps.size(), cfg.workers, [&](std::size_t i) {
    Rng rng = replication_rng(cfg.seed, i, kPacketStream);
    reps[i] = run_packet_replicate(p, params, cfg.n_packets, rng);
  });

  PacketSimOutput out;
  out.z_histogram.assign(kHistogramBins, 0);
  std::vector<double> aoi, paoi, y, z, x;
  for (const auto& r : reps) {
    aoi.push_back(r.aoi);
    paoi.push_back(r.paoi);
    y.push_back(r.y);
    z.push_back(r.z);
    x.push_back(r.x);
    for (std::size_t b = 0; b < kHistogramBins; ++b) out.z_histogram[b] += r.histogram[b];
  }
  const std::uint64_t n = cfg.n_packets * cfg.replication_count;
  out.avg_aoi = summarize(aoi, n, cfg.seed);
  out.avg_paoi = summarize(paoi, n, cfg.seed);
  out.mean_y = summarize(y, n, cfg.seed);
  out.mean_z = summarize(z, n, cfg.seed);
  out.mean_x = summarize(x, n, cfg.seed);
  return out;
}

FadingSimOutput simulate_fading_process(const channel::FadingParams& fp, const pep::PacketParams& pp,
                                        double gamma_th, const SimConfig& cfg) {
  fp.validate();
  pp.validate();
  cfg.validate_channel(fp.doppler_hz);
  if (!(gamma_th > 0.0)) throw DomainError("gamma_th must be > 0");

  const bool dynamic = fp.doppler_hz > 0.0;
  StepPlan plan{0.0, 0, 0};
  if (dynamic) plan = plan_steps(fp.doppler_hz, pp.t_packet_s, cfg);

  std::vector<ChannelReplicate> reps(cfg.replication_count);
  parallel_for(reps.size(), cfg.workers, [&](std::size_t i) {
    Rng rng = replication_rng(cfg.seed, i, kChannelStream);
    reps[i] = dynamic ? run_dynamic_replicate(fp, gamma_th, cfg, plan, rng)
                      : run_static_replicate(fp, gamma_th, cfg, rng);
  });

  std::vector<double> cdf, lcr, pep;
  std::uint64_t samples = 0;
  for (const auto& r : reps) {
    cdf.push_back(r.cdf);
    lcr.push_back(r.lcr);
    pep.push_back(r.pep);
    samples += r.samples;
  }
  FadingSimOutput out;
  out.cdf = summarize(cdf, samples, cfg.seed);
  out.lcr = summarize(lcr, samples, cfg.seed);
  out.pep = summarize(pep, samples, cfg.seed);
  out.time_step_s = plan.dt;
  return out;
}

std::vector<double> sample_branch_envelopes(const channel::FadingParams& fp, const SimConfig& cfg,
                                            std::size_t count) {
  fp.validate();
  channel::FadingParams single = fp;
  single.n_antennas = 1;
  std::vector<double> out(count);
  parallel_for(count, cfg.workers, [&](std::size_t i) {
    Rng rng = replication_rng(cfg.seed, i, kEnvelopeStream);
    SosChannel ch(single, cfg.n_sinusoids, rng);
    const double horizon = fp.doppler_hz > 0.0 ? 1000.0 / fp.doppler_hz : 0.0;
    ch.evaluate_at(horizon * uniform01(rng));
    out[i] = std::abs(ch.gain(0));
  });
  return out;
}

}  // namespace aoi::sim
