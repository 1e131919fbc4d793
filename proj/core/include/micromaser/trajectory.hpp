#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <micromaser/params.hpp>

namespace micromaser {

enum class Outcome : std::uint8_t { detected_A, detected_B, undetected };

struct DetectionEvent {
    double time = 0.0;  // tau = r*t since the end of burn-in
    Outcome outcome = Outcome::undetected;
};

// Raw output of the jump-process simulation: one entry per atom passage,
// times strictly increasing, plus tallies used by the consistency checks.
struct DetectionRecord {
    std::vector<DetectionEvent> events;
    std::uint64_t seed = 0;
    long n_atoms = 0;
    double duration = 0.0;  // time of the last passage
    MaserParams params;

    long branch_a = 0;  // atoms leaving excited (detected or not)
    long branch_b = 0;  // atoms leaving de-excited
    long detected_a = 0;
    long detected_b = 0;
    long overflow_events = 0;  // photon-number jumps clamped at the cap

    // Photon number seen by each arriving atom; the stationary marginal.
    std::vector<std::uint64_t> arrival_photon_histogram;
};

// Simulates the classical jump process on the photon number: thermal
// birth/death jumps between Poissonian atom arrivals, a flip/keep branch at
// each passage, and a detector coin per branch. The record is bit-identical
// for a fixed seed. Burn-in (default 100 * n_ex atoms, at least 1000) is run
// before the clock starts.
DetectionRecord simulate(const MaserParams& params, long n_atoms,
                         std::uint64_t seed, const NumericsConfig& cfg = {});

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    long n_samples = 0;
};

// Point estimate with a batch-means standard error. Observables:
//   P[A]  P[B]  I  Itilde  n_A  n_B
//   t_AA  t_BB  t_AB  t_BA  t2_AA  t2_BB      (tau units)
//   Q_A@<window>  Q_B@<window>                (window in tau)
//   P[<seq>] for sequences over {A,B} up to length 3
// Throws InsufficientData below 100 relevant events.
Estimate estimate(const DetectionRecord& record, std::string_view observable);

// One event per line: "<time> A|B|none".
void dump_record(const DetectionRecord& record, std::ostream& out);

} // namespace micromaser
