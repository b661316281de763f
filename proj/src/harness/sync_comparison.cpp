#include "syncap/harness/sync_comparison.hpp"

#include <cmath>

#include "syncap/harness/parallel.hpp"
#include "syncap/harness/session.hpp"

namespace syncap::harness {

const SchemeSpread* SyncComparison::find(const std::string& scheme, double jitter_ms, int devices) const {
  for (const auto& r : rows)
    if (r.scheme == scheme && r.jitter_ms == jitter_ms && r.devices == devices) return &r;
  return nullptr;
}

namespace {

struct GridCell {
  std::size_t scheme;
  std::size_t jitter;
  std::size_t devices;
};

struct SeedOutcome {
  double mean = 0.0;
  double max = 0.0;
  std::vector<double> spreads;
};

}  // namespace

SyncComparison run_sync_comparison(const Config& c, std::uint64_t seed, const std::optional<std::filesystem::path>& out) {
  validate(c);
  if (out) claim_output_dir(*out, c, "sync-compare");
  const auto& x = c.sync;

  std::vector<GridCell> cells;
  for (std::size_t s = 0; s < x.schemes.size(); ++s)
    for (std::size_t j = 0; j < x.jitter_ms.size(); ++j)
      for (std::size_t d = 0; d < x.devices.size(); ++d) cells.push_back({s, j, d});
  const std::size_t seeds = static_cast<std::size_t>(x.seeds);

  // one task per (cell, seed); every simulation stays single-threaded
  const auto outcomes = parallel_map(cells.size() * seeds, [&](std::size_t task) {
    const GridCell& cell = cells[task / seeds];
    const std::uint64_t run_seed = derive_seed(seed, "sync-seed", task % seeds);
    Config cc = c;
    cc.devices = x.devices[cell.devices];
    cc.duration_s = x.duration_s;
    cc.network.jitter_ms = x.jitter_ms[cell.jitter];
    cc.network.asymmetry_ms = x.asymmetry_ms;
    cc.network.trigger_loss = 0.0;
    const auto timing = simulate_timing(timing_setup(cc, run_seed),
                                        scheme_from_name(x.schemes[cell.scheme], c.ntp_requests), run_seed);
    return SeedOutcome{timing.spread.mean_ms, timing.spread.max_ms, timing.spread.per_trigger_ms};
  });

  SyncComparison result{{},
                        CsvTable({"scheme", "jitter_ms", "devices", "seeds", "mean_spread_ms", "std_spread_ms",
                                  "seed_std_ms", "max_spread_ms"},
                                 seed, config_hash(c)),
                        {}};
  for (std::size_t k = 0; k < cells.size(); ++k) {
    SchemeSpread row{x.schemes[cells[k].scheme], x.jitter_ms[cells[k].jitter], x.devices[cells[k].devices]};
    double sum = 0.0, sum2 = 0.0, pooled = 0.0, pooled2 = 0.0;
    std::size_t n = 0;
    for (std::size_t s = 0; s < seeds; ++s) {
      const auto& o = outcomes[k * seeds + s];
      sum += o.mean;
      sum2 += o.mean * o.mean;
      row.max_ms = std::max(row.max_ms, o.max);
      for (double v : o.spreads) {
        pooled += v;
        pooled2 += v * v;
        ++n;
      }
    }
    const double ns = static_cast<double>(seeds);
    row.mean_ms = sum / ns;
    row.seed_std_ms = std::sqrt(std::max(0.0, sum2 / ns - row.mean_ms * row.mean_ms));
    if (n > 0) {
      const double m = pooled / static_cast<double>(n);
      row.std_ms = std::sqrt(std::max(0.0, pooled2 / static_cast<double>(n) - m * m));
    }
    result.table.add({row.scheme, row.jitter_ms, std::int64_t(row.devices), std::int64_t(seeds), row.mean_ms,
                      row.std_ms, row.seed_std_ms, row.max_ms});
    result.rows.push_back(row);
  }
  if (out) result.table.write(*out / "sync_comparison.csv");

  auto& r = result.report;
  r.experiment = "sync-compare";
  const int asserted = x.asserted_devices;
  for (double sigma : x.jitter_ms) {
    const auto* relay = result.find("trigger_relay", sigma, asserted);
    const auto* ntp = result.find("ntp_averaged", sigma, asserted);
    const auto* none = result.find("no_compensation", sigma, asserted);
    const std::string at = "sigma " + format_cell(sigma) + " ms, " + std::to_string(asserted) + " devices";
    if (sigma == 0.0) {
      if (relay) r.check("relay spread vanishes without jitter, " + at, relay->mean_ms < 0.01, format_cell(relay->mean_ms) + " ms");
      continue;
    }
    if (relay && ntp)
      r.check("relay and averaged NTP within one sigma, " + at, std::abs(relay->mean_ms - ntp->mean_ms) <= sigma,
              format_cell(relay->mean_ms) + " vs " + format_cell(ntp->mean_ms) + " ms");
    if (none && x.asymmetry_ms > 0.0) {
      for (const auto* s : {relay, ntp})
        if (s)
          r.check(s->scheme + " beats no compensation by 25%, " + at, s->mean_ms <= 0.75 * none->mean_ms,
                  format_cell(s->mean_ms) + " vs " + format_cell(none->mean_ms) + " ms");
    }
  }
  return result;
}

}  // namespace syncap::harness
