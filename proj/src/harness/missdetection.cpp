#include "syncap/harness/missdetection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "syncap/common/error.hpp"
#include "syncap/geometry/reprojection.hpp"
#include "syncap/harness/parallel.hpp"
#include "syncap/harness/reconstruction.hpp"
#include "syncap/harness/session.hpp"
#include "syncap/sim/observe.hpp"

namespace syncap::harness {

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

struct Clean {
  std::vector<std::vector<geometry::Skeleton2D>> observations;  // [frame][camera]
  std::vector<std::vector<geometry::Camera>> cameras;
};

Clean clean_frames(const Config& c, double sigma, std::uint64_t seed) {
  const Scene scene = make_scene(c, seed);
  Clean clean;
  std::vector<Rng> rngs;
  for (std::size_t d = 0; d < scene.rig.size(); ++d) rngs.push_back(make_rng(seed, "detector", d));
  for (int k = 0; k < c.missdet.frames; ++k) {
    const double t = k / c.trigger_hz;
    const auto truth = sim::actor_pose_at(t, scene.actor, static_cast<std::size_t>(k));
    std::vector<geometry::Skeleton2D> obs;
    std::vector<geometry::Camera> cams;
    for (std::size_t d = 0; d < scene.rig.size(); ++d) {
      cams.push_back(sim::true_camera(scene.rig, d, t));
      obs.push_back(sim::observe_joints(truth, cams.back(), {sigma, 0.0, 1.0}, rngs[d], d));
    }
    clean.observations.push_back(std::move(obs));
    clean.cameras.push_back(std::move(cams));
  }
  return clean;
}

bool has_observing_pair(const std::vector<geometry::Skeleton2D>& obs, const std::vector<geometry::Camera>& cams,
                        const geometry::PairAngleRange& range) {
  for (const auto& p : geometry::valid_pairs(cams, range))
    for (std::size_t m = 0; m < obs[p.first].joints.size(); ++m)
      if (obs[p.first].joints[m] && obs[p.second].joints[m]) return true;
  return false;
}

struct CellResult {
  double mean_error = 0.0;  // over evaluated frames
  std::size_t aborted = 0;
  std::size_t unresolved = 0;
};

CellResult run_cell(const Config& c, const Clean& clean, double rate, int affected, std::uint64_t seed) {
  const auto options = reconstruction_options(c);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CellResult out;
  double sum = 0.0;
  std::size_t evaluated = 0;
  for (std::size_t k = 0; k < clean.observations.size(); ++k) {
    auto obs = clean.observations[k];
    const auto& cams = clean.cameras[k];
    for (int d = 0; d < affected && d < static_cast<int>(obs.size()); ++d)
      if (u(rng) < rate) obs[d] = geometry::Skeleton2D::missing(obs[d].joints.size(), k, d);
    const bool observable = has_observing_pair(obs, cams, options.pair_range);
    try {
      const auto rec = geometry::reconstruct_frame(obs, cams, options);
      if (rec.unresolved) {
        ++out.unresolved;
        if (observable) ++out.aborted;
        continue;
      }
      sum += geometry::reprojection_error(rec.skeleton, clean.observations[k], cams).mean;
      ++evaluated;
    } catch (const Error&) {
      ++out.aborted;
    }
  }
  out.mean_error = evaluated == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(evaluated);
  return out;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::InvalidArgument, "spearman needs equal lengths");
  if (x.size() < 2) return 0.0;
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

MissDetectionSweep run_missdetection_sweep(const Config& c, std::uint64_t seed,
                                           const std::optional<std::filesystem::path>& out) {
  validate(c);
  if (out) claim_output_dir(*out, c, "missdet-sweep");
  const auto& m = c.missdet;
  std::vector<int> affected = m.affected;
  if (affected.empty())
    for (int a = 1; a <= c.devices - 2; ++a) affected.push_back(a);
  const std::size_t seeds = static_cast<std::size_t>(m.seeds);

  struct Job {
    std::size_t sigma;
    std::size_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < m.pixel_sigmas.size(); ++s)
    for (std::size_t k = 0; k < seeds; ++k) jobs.push_back({s, k});

  // per job: every (rate, affected) cell for one sigma and one seed
  const auto results = parallel_map(jobs.size(), [&](std::size_t j) {
    const std::uint64_t run_seed = derive_seed(seed, "missdet-seed", jobs[j].seed);
    const Clean clean = clean_frames(c, m.pixel_sigmas[jobs[j].sigma], run_seed);
    std::vector<CellResult> cells;
    for (std::size_t r = 0; r < m.rates.size(); ++r)
      for (std::size_t a = 0; a < affected.size(); ++a)
        cells.push_back(run_cell(c, clean, m.rates[r], affected[a], derive_seed(run_seed, "drop", r * 1024 + a)));
    return cells;
  });

  MissDetectionSweep sweep{{},
                           CsvTable({"pixel_sigma", "rate", "affected_cameras", "seeds", "frames", "mean_error_px",
                                     "std_error_px", "aborted", "unresolved"},
                                    seed, config_hash(c)),
                           {}};
  for (std::size_t s = 0; s < m.pixel_sigmas.size(); ++s)
    for (std::size_t r = 0; r < m.rates.size(); ++r)
      for (std::size_t a = 0; a < affected.size(); ++a) {
        MissPoint p{m.pixel_sigmas[s], m.rates[r], affected[a]};
        std::vector<double> per_seed;
        for (std::size_t k = 0; k < seeds; ++k) {
          const auto& cell = results[s * seeds + k][r * affected.size() + a];
          if (!std::isnan(cell.mean_error)) per_seed.push_back(cell.mean_error);
          p.aborted += cell.aborted;
          p.unresolved += cell.unresolved;
          p.frames += static_cast<std::size_t>(m.frames);
        }
        if (!per_seed.empty()) {
          const double n = static_cast<double>(per_seed.size());
          p.mean_error_px = std::accumulate(per_seed.begin(), per_seed.end(), 0.0) / n;
          double v = 0.0;
          for (double e : per_seed) v += (e - p.mean_error_px) * (e - p.mean_error_px);
          p.std_error_px = std::sqrt(v / n);
        } else {
          p.mean_error_px = std::numeric_limits<double>::quiet_NaN();
        }
        sweep.table.add({p.pixel_sigma, p.rate, std::int64_t(p.affected), std::int64_t(seeds), std::int64_t(p.frames),
                         p.mean_error_px, p.std_error_px, std::int64_t(p.aborted), std::int64_t(p.unresolved)});
        sweep.points.push_back(p);
      }
  if (out) sweep.table.write(*out / "missdetection.csv");

  auto& r = sweep.report;
  r.experiment = "missdet-sweep";
  std::size_t aborted = 0;
  for (const auto& p : sweep.points) aborted += p.aborted;
  r.check("no frame aborts while a valid pair observes the actor", aborted == 0,
          std::to_string(aborted) + " aborted frames");
  for (double sigma : m.pixel_sigmas)
    for (int a : affected) {
      std::vector<double> rates, errors;
      for (const auto& p : sweep.points)
        if (p.pixel_sigma == sigma && p.affected == a) {
          rates.push_back(p.rate);
          errors.push_back(p.mean_error_px);
        }
      const std::string at = "sigma " + format_cell(sigma) + " px, " + std::to_string(a) + " affected";
      if (sigma == 0.0) {
        // errors are all ~0 here, so their order is rounding noise; check exactness instead
        const double worst = *std::max_element(errors.begin(), errors.end());
        r.check("noiseless detections reconstruct exactly, " + at, worst < 1e-6, format_cell(worst) + " px");
        continue;
      }
      const double rho = spearman(rates, errors);
      r.check("error does not fall as the miss rate grows, " + at, rho >= 0.0, "spearman " + format_cell(rho));
    }
  return sweep;
}

}  // namespace syncap::harness
