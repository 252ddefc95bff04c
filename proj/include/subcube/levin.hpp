#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace subcube {

namespace detail {

// ceil(x) that ignores rounding noise just above an integer.
inline std::uint64_t ceil_count(double x) {
  return static_cast<std::uint64_t>(std::ceil(x - 1e-9 * std::max(1.0, std::fabs(x))));
}

}  // namespace detail

/// The loop bounds of the work-balance procedure for threshold eps.
struct LevinSchedule {
  double eps = 0.5;
  int rounds = 1;                      // ceil(log2(2/eps))
  std::uint64_t inner_repetitions = 0;  // ceil(64 (log2(1/eps) + 2))

  static LevinSchedule for_threshold(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("Levin: threshold must lie in (0, 1)");
    LevinSchedule s;
    s.eps = eps;
    s.rounds = 0;
    while (std::ldexp(1.0, s.rounds) < 2.0 / eps * (1.0 - 1e-12)) ++s.rounds;
    s.inner_repetitions = detail::ceil_count(64.0 * (std::log2(1.0 / eps) + 2.0));
    return s;
  }

  double eps_prime(int t) const { return std::ldexp(1.0, -t); }
  std::uint64_t outer_draws(int t) const { return detail::ceil_count(std::ldexp(8.0, -t) / eps); }

  std::uint64_t total_outer_draws() const {
    std::uint64_t total = 0;
    for (int t = 1; t <= rounds; ++t) total += outer_draws(t);
    return total;
  }
  std::uint64_t total_black_box_runs() const { return total_outer_draws() * inner_repetitions; }
};

struct LevinRound {
  int t = 0;
  double eps_prime = 0.0;
  std::uint64_t planned_draws = 0;
  std::uint64_t draws = 0;
  std::uint64_t black_box_runs = 0;
  std::int64_t min_tally = 0;  // smallest final r over the draws of this round
  bool rejected = false;
};

struct LevinResult {
  bool accept = true;
  std::vector<LevinRound> rounds;
  std::uint64_t draws = 0;
  std::uint64_t black_box_runs = 0;
};

/// Black box answering k independent runs on (y, eps') at once.
template <class B, class Y>
concept BatchedBlackBox = requires(B& b, const Y& y, double e, std::uint64_t k) {
  { b.accepts_in(y, e, k) } -> std::convertible_to<std::uint64_t>;
};

template <class B, class Y>
concept SingleBlackBox = requires(B& b, const Y& y, double e) {
  { b(y, e) } -> std::convertible_to<bool>;
};

/// Work-balance procedure. Writes progress into `out` as it goes, so the
/// partial trace survives an exception thrown by the black box.
template <class DrawY, class BlackBox>
void run_levin(DrawY& draw_y, BlackBox& black_box, const LevinSchedule& schedule, LevinResult& out) {
  using Y = decltype(draw_y());
  static_assert(BatchedBlackBox<BlackBox, Y> || SingleBlackBox<BlackBox, Y>,
                "black box must be callable as bb(y, eps') or bb.accepts_in(y, eps', k)");
  out = LevinResult{};
  const auto k = static_cast<std::int64_t>(schedule.inner_repetitions);
  for (int t = 1; t <= schedule.rounds; ++t) {
    LevinRound& round = out.rounds.emplace_back();
    round.t = t;
    round.eps_prime = schedule.eps_prime(t);
    round.planned_draws = schedule.outer_draws(t);
    round.min_tally = k;
    for (std::uint64_t d = 0; d < round.planned_draws; ++d) {
      const Y y = draw_y();
      ++round.draws;
      ++out.draws;
      std::int64_t r = 0;
      if constexpr (BatchedBlackBox<BlackBox, Y>) {
        const auto accepts = static_cast<std::int64_t>(black_box.accepts_in(y, round.eps_prime, schedule.inner_repetitions));
        r = 2 * accepts - k;
      } else {
        for (std::int64_t j = 0; j < k; ++j) r += black_box(y, round.eps_prime) ? 1 : -1;
      }
      round.black_box_runs += schedule.inner_repetitions;
      out.black_box_runs += schedule.inner_repetitions;
      round.min_tally = std::min(round.min_tally, r);
      if (r < 0) {
        round.rejected = true;
        out.accept = false;
        return;
      }
    }
  }
  out.accept = true;
}

template <class DrawY, class BlackBox>
LevinResult levin_balance(DrawY&& draw_y, BlackBox&& black_box, double eps) {
  LevinResult out;
  run_levin(draw_y, black_box, LevinSchedule::for_threshold(eps), out);
  return out;
}

}  // namespace subcube
