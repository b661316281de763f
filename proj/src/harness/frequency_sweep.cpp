#include "syncap/harness/frequency_sweep.hpp"

#include <algorithm>
#include <cmath>

#include "syncap/harness/parallel.hpp"
#include "syncap/sim/network.hpp"
#include "syncap/sync/time.hpp"

namespace syncap::harness {

namespace {

constexpr double kHttpHeaderBytes = 400.0;

SweepPoint simulate_point(const FrequencyExperimentConfig& f, int devices, double hz, std::uint64_t seed) {
  using sync::Nanos;
  SweepPoint p;
  p.devices = devices;
  p.frequency_hz = hz;
  p.offered_ratio = devices * hz * static_cast<double>(f.record_bytes) / f.cap_bytes_per_s;

  Rng rng(seed);
  std::normal_distribution<double> jitter(0.0, f.jitter_ms);
  const auto triggers = static_cast<std::size_t>(std::floor(f.duration_s * hz)) + 1;
  struct Send {
    Nanos at;
    std::size_t trigger;
  };
  std::vector<Send> sends;
  for (std::size_t k = 0; k < triggers; ++k) {
    const Nanos t = sync::seconds_to_ns(static_cast<double>(k) / hz);
    for (int d = 0; d < devices; ++d) sends.push_back({t + sync::ms_to_ns(std::abs(jitter(rng))), k});
  }
  std::stable_sort(sends.begin(), sends.end(), [](const Send& a, const Send& b) { return a.at < b.at; });

  sim::FluidLink link(f.cap_bytes_per_s, sync::ms_to_ns(f.latency_ms));
  std::vector<Nanos> merged(triggers, 0);
  for (const auto& s : sends) merged[s.trigger] = std::max(merged[s.trigger], link.deliver(f.record_bytes, s.at));

  std::vector<double> gaps;
  for (std::size_t k = 1; k < triggers && static_cast<double>(k) / hz < f.window_s; ++k)
    gaps.push_back(sync::ns_to_seconds(merged[k] - merged[k - 1]));
  if (!gaps.empty()) {
    double sum = 0.0, sum2 = 0.0;
    for (double g : gaps) {
      sum += g;
      sum2 += g * g;
    }
    const double n = static_cast<double>(gaps.size());
    p.mean_gap_s = sum / n;
    p.std_gap_s = std::sqrt(std::max(0.0, sum2 / n - p.mean_gap_s * p.mean_gap_s));
  }
  for (int s = 1; s <= static_cast<int>(std::floor(f.window_s)); ++s)
    p.backlog_bytes.push_back(link.backlog(sync::seconds_to_ns(s)));
  return p;
}

}  // namespace

TransportModel transport_model(int devices, double hz, std::size_t record_bytes, double cap, double latency_s) {
  const double offered = devices * hz * static_cast<double>(record_bytes);
  TransportModel m;
  m.stream_delivered = std::min(1.0, cap / offered);
  // each device waits for its request to finish before the next one
  const double setup = 3.0 * 2.0 * latency_s;
  const double transfer = devices * (static_cast<double>(record_bytes) + kHttpHeaderBytes) / cap;
  const double per_device_rate = 1.0 / (setup + transfer);
  m.http_delivered = std::min({1.0, per_device_rate / hz, m.stream_delivered});
  return m;
}

FrequencySweep run_frequency_sweep(const Config& c, std::uint64_t seed, const std::optional<std::filesystem::path>& out) {
  validate(c);
  if (out) claim_output_dir(*out, c, "freq-sweep");
  const auto& f = c.freq;
  const std::string hash = config_hash(c);

  struct Job {
    int devices;
    double hz;
  };
  std::vector<Job> jobs;
  for (int n : f.devices)
    for (double hz : f.frequencies_hz) jobs.push_back({n, hz});
  auto points = parallel_map(jobs.size(), [&](std::size_t i) {
    return simulate_point(f, jobs[i].devices, jobs[i].hz, derive_seed(seed, "freq", i));
  });

  FrequencySweep sweep{{},
                       CsvTable({"devices", "frequency_hz", "offered_ratio", "reference_gap_s", "mean_gap_s",
                                 "std_gap_s", "backlog_end_bytes", "regime"},
                                seed, hash),
                       CsvTable({"model", "devices", "frequency_hz", "offered_ratio", "stream_delivered",
                                 "http_delivered"},
                                seed, hash),
                       {}};
  auto& r = sweep.report;
  r.experiment = "freq-sweep";
  for (const auto& p : points) {
    const double ref = 1.0 / p.frequency_hz;
    const char* regime = p.offered_ratio < 1.0 ? "below_cap" : p.offered_ratio > 1.5 ? "overloaded" : "knee";
    sweep.table.add({std::int64_t(p.devices), p.frequency_hz, p.offered_ratio, ref, p.mean_gap_s, p.std_gap_s,
                     p.backlog_bytes.empty() ? 0.0 : p.backlog_bytes.back(), std::string(regime)});
    const auto m = transport_model(p.devices, p.frequency_hz, f.record_bytes, f.cap_bytes_per_s, f.latency_ms / 1e3);
    sweep.transport.add({std::string("MODEL"), std::int64_t(p.devices), p.frequency_hz, p.offered_ratio,
                         m.stream_delivered, m.http_delivered});

    const std::string at = std::to_string(p.devices) + " devices at " + format_cell(p.frequency_hz) + " Hz";
    const std::string detail = "gap " + format_cell(p.mean_gap_s) + " s vs " + format_cell(ref) + " s, load " +
                               format_cell(p.offered_ratio) + "x cap";
    if (p.offered_ratio < 1.0) {
      r.check("gap tracks 1/phi below the cap, " + at, std::abs(p.mean_gap_s - ref) <= 0.1 * ref, detail);
    } else if (p.offered_ratio > 1.5) {
      bool growing = p.backlog_bytes.size() >= 2;
      for (std::size_t i = 1; growing && i < p.backlog_bytes.size(); ++i)
        growing = p.backlog_bytes[i] > p.backlog_bytes[i - 1];
      r.check("gap exceeds 1.5/phi above the cap, " + at, p.mean_gap_s > 1.5 * ref, detail);
      r.check("backlog grows above the cap, " + at, growing,
              "backlog " + format_cell(p.backlog_bytes.empty() ? 0.0 : p.backlog_bytes.back()) + " bytes");
    }
  }
  sweep.points = std::move(points);
  if (out) {
    sweep.table.write(*out / "freq_sweep.csv");
    sweep.transport.write(*out / "transport_model.csv");
  }
  return sweep;
}

}  // namespace syncap::harness
