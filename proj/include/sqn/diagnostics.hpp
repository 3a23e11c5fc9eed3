#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqn/objective.hpp"

namespace sqn {

/// Eigenvalue lists at one checkpoint of a classical SR1 run: the true
/// Hessian, the dense SR1 approximation rebuilt from the entire pair history,
/// the limited-memory SR1 over the m most recent pairs, and a sampled LSR1
/// approximation from m fresh pairs at the same iterate. All lists ascending,
/// all of length d.
struct SpectrumSnapshot {
  std::int64_t checkpoint = 0;
  Vector iterate;
  Vector true_eigs;
  Vector sr1_eigs;
  Vector lsr1_eigs;
  Vector slsr1_eigs;
  bool slsr1_fallback = false;     // zero sampled pairs accepted
  std::int64_t sr1_skipped = 0;    // history pairs skipped by the rebuild
  std::int64_t lsr1_accepted = 0;
  std::int64_t slsr1_accepted = 0;
};

/// Three evenly spaced checkpoints in [T/4, T-1].
std::vector<std::int64_t> default_checkpoints(std::int64_t iterations);

/// Runs classical SR1 for `iterations` iterations storing all history, then
/// builds the four spectra at each checkpoint. Checkpoint c means "after c
/// iterations". The sampled approximation draws pairs by gradient differences
/// at radius r (the radius is what makes the sampled spectra local).
/// Evaluations here are diagnostic and not epoch-accounted.
std::vector<SpectrumSnapshot> spectrum_run(
    const Objective& obj, const Vector& w0, std::int64_t iterations,
    std::size_t m, double r, const std::vector<std::int64_t>& checkpoints,
    std::uint64_t seed);

/// Mean absolute difference between ascending lists after one-to-one pairing
/// truncated to the shorter length.
double spectrum_match(const Vector& a, const Vector& b);

/// CSV for one checkpoint: header `checkpoint,source,index,eigenvalue` with
/// source in {true, sr1, lsr1, slsr1}, then `# key,value` comment lines
/// recording skip counts and the identity fallback.
std::string spectrum_to_csv(const SpectrumSnapshot& snap);

}  // namespace sqn
