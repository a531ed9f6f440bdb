#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "maser/params.hpp"

namespace maser {

/// Jump types of the unravelling that change the photon number:
/// 1 = ground-state atom detected (n -> n+1, counted),
/// 3 = photon lost to the bath (n -> n-1),
/// 4 = photon absorbed from the bath (n -> n+1).
/// Excited-atom detections (type 2) leave the state unchanged and are not
/// counted, so they are not sampled.
enum class JumpType : std::uint8_t { ground_atom = 1, emission = 3, absorption = 4 };

struct JumpEvent {
  double time = 0.0;
  JumpType type = JumpType::ground_atom;
  std::size_t level = 0;  // level after the jump
};

struct Trajectory {
  std::size_t initial = 0;
  std::vector<JumpEvent> events;
  double t_final = 0.0;
  std::uint64_t count_1 = 0;  // Lambda_t
};

/// Raised when a path climbs to the level safety cap.
class TrajectoryAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulationOptions {
  /// 0 means 200 * max(1, nex).
  std::size_t level_cap = 0;
  bool record_events = true;
};

/// Per-trajectory random stream: a 64-bit Mersenne twister seeded through a
/// SplitMix64 scramble of the trajectory seed, so neighbouring seeds give
/// unrelated streams.
class TrajectoryRng {
 public:
  explicit TrajectoryRng(std::uint64_t seed);
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Samples the jump process from Fock state `initial` up to time t_max.
/// Throws std::invalid_argument for a non-finite or non-positive t_max and
/// TrajectoryAbort when the level reaches the safety cap.
Trajectory simulate(const MaserParams& params, std::size_t initial, double t_max,
                    std::uint64_t seed, const SimulationOptions& options = {});

struct MgfEstimate {
  double s = 0.0;
  double estimate = 0.0;
  double standard_error = 0.0;
};

struct EnsembleStats {
  std::size_t n_traj = 0;  // trajectories that completed
  double t_final = 0.0;
  double mean_rate = 0.0;     // sample mean of Lambda_t / t
  double mean_rate_se = 0.0;  // its standard error
  double var_rate = 0.0;      // t * sample variance of Lambda_t / t
  std::vector<MgfEstimate> mgf_estimates;
  std::uint64_t seed_base = 0;
  std::size_t aborted = 0;
  std::vector<std::uint64_t> counts;  // Lambda_t per completed trajectory, seed order
};

struct EnsembleOptions {
  unsigned threads = 1;
  std::size_t level_cap = 0;
};

/// Runs n_traj >= 2 trajectories with seeds seed_base .. seed_base+n_traj-1.
/// Aborted trajectories are dropped and counted; more than 0.1% of them
/// raises std::runtime_error. The reduction runs in seed order, so results
/// do not depend on the thread count.
EnsembleStats ensemble(const MaserParams& params, std::size_t initial, double t_max,
                       std::size_t n_traj, const std::vector<double>& s_list,
                       std::uint64_t seed_base, const EnsembleOptions& options = {});

enum class Phase : std::uint8_t { low, high };

struct DwellSegment {
  Phase phase = Phase::low;
  double duration = 0.0;
};

/// Splits the level path into low (< threshold) and high phases. Excursions
/// shorter than `min_dwell` do not switch the phase. Adjacent segments
/// always alternate.
std::vector<DwellSegment> dwell_times(const Trajectory& traj, std::size_t threshold,
                                      double min_dwell = 1.0);

/// Fraction of [0, t_final] spent at each level 0..dim-1 (time beyond dim-1
/// is dropped).
std::vector<double> occupation(const Trajectory& traj, std::size_t dim);

}  // namespace maser
