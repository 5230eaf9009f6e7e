#include "tccsim/simulator.hpp"

#include <algorithm>
#include <stdexcept>

#include "tccsim/digest.hpp"
#include "tccsim/rng.hpp"

namespace simkernel {

namespace {

constexpr std::size_t kAuditLogCap = 1024;

// Integer-exact jitter draw, in model nanoseconds (pre-scaling).
std::int64_t draw_jitter(tccsim::Xoshiro256ss& rng, const JitterModel& j) {
  std::int64_t draw = 0;
  switch (j.kind) {
    case JitterKind::none:
      return 0;
    case JitterKind::uniform:
      draw = rng.uniform(0, j.magnitude_ns);
      break;
    case JitterKind::truncated_normal: {
      // Sum of 12 uniforms on [0, magnitude/12]: mean magnitude/2,
      // sd ~ magnitude/12, support within [0, magnitude].
      const std::int64_t u = j.magnitude_ns / 12;
      for (int i = 0; i < 12; ++i) draw += rng.uniform(0, u);
      break;
    }
  }
  if (j.tail_probability > 0.0 && rng.chance(j.tail_probability)) {
    draw += rng.uniform(0, j.tail_magnitude_ns);
  }
  return draw;
}

}  // namespace

SimResult run_simulation(const ValidatedConfig& vcfg,
                         const attackchan::AttackPlan* attack,
                         EventDetail detail) {
  const SimConfig& cfg = vcfg.cfg();
  const unsigned n_exp = cfg.speed_exponent;
  const bool attacking = attack != nullptr && !attack->actions.empty();
  const bool keep_events = detail == EventDetail::full;

  if (attacking && !vcfg.attack_capable()) {
    throw std::invalid_argument(
        "attack plan requires sender and receiver boards in the config");
  }

  SimResult out;
  out.trace.meta.config_digest = vcfg.digest();
  out.trace.meta.seed = cfg.seed;
  out.trace.meta.attack = attacking;
  out.trace.meta.counter_freq = cfg.counter_freq;

  tccsim::Xoshiro256ss rng(cfg.seed);

  std::int64_t now = 0;        // virtual ns
  std::int64_t frame = 0;
  std::int64_t sender_activations = 0;
  std::int64_t pending_flush = 0;  // stall charged to the next switch
  std::int64_t pending_cs = 0;
  bool have_prev_sample = false;
  std::uint64_t prev_receiver_ticks = 0;

  const std::size_t n_boards = cfg.boards.size();
  if (keep_events) {
    out.log.switches.reserve(
        static_cast<std::size_t>(cfg.sim_duration_ns /
                                 vcfg.nominal_major_frame_ns() +
                                 1) *
        n_boards);
  }

  auto ticks_now = [&]() {
    return counter_ticks(now, cfg.counter_freq, n_exp);
  };

  // TSB for a receiver scheduled first in the frame: its slice begins at
  // t=0 without a preceding switch-in event.
  if (vcfg.receiver_index() == std::size_t{0}) {
    prev_receiver_ticks = ticks_now();
    have_prev_sample = true;
    out.trace.meta.start_offset_ticks = prev_receiver_ticks;
  }

  while (now < cfg.sim_duration_ns) {
    for (std::size_t i = 0; i < n_boards; ++i) {
      const auto& board = cfg.boards[i];
      const std::int64_t slice_end = now + board.time_slice_ns;

      // Periodic virtual-timer ticks inside the slice; they consume slice
      // time the guest already owns and never move a boundary.
      out.log.tick_interrupts += static_cast<std::uint64_t>(
          (static_cast<unsigned __int128>(board.time_slice_ns) *
           static_cast<unsigned __int128>(cfg.tick_frequency)) /
          1'000'000'000u);

      if (board.role == BoardRole::sender) {
        const attackchan::AttackAction* action =
            attacking ? attack->action_for(sender_activations) : nullptr;
        if (action != nullptr && action->burst) {
          // TSE handler: issue the burst back-to-back until the slice ends.
          const auto kind = action->spec.kind;
          if (!board.authorized_hypercalls.contains(kind)) {
            // Authorization check only; the denied calls cost nothing.
            out.log.audit_count += action->spec.count;
            if (out.log.audits.size() < kAuditLogCap)
              out.log.audits.push_back({frame, board.id, kind});
          } else {
            const auto& hc = cfg.hypercalls.cost(kind);
            const std::int64_t call_ns = scaled_cost(hc.base_cost_ns, n_exp);
            std::int64_t t = slice_end - board.tse_offset_ns;
            for (std::uint32_t c = 0; c < action->spec.count; ++c) {
              if (call_ns > 0 && t + call_ns > slice_end) {
                // Still in flight when the scheduler takes over.
                pending_cs = std::max(pending_cs, hc.critical_section_ns);
                break;
              }
              t += call_ns;
              ++out.log.hypercalls_executed;
              // The cache does not get "more flushed" by repetition: the
              // next switch pays the heaviest triggered penalty once.
              pending_flush =
                  std::max(pending_flush, hc.cache_flush_penalty_ns);
            }
          }
        }
        ++sender_activations;
      }

      now = slice_end;

      // Context switch out of board i into board (i+1) % n.
      const std::size_t j = (i + 1) % n_boards;
      const std::int64_t jitter_ns = draw_jitter(rng, cfg.jitter);
      std::int64_t actual =
          scaled_cost(cfg.base_switch_cost_ns + jitter_ns, n_exp);
      if (n_exp == 0) actual += pending_flush + pending_cs;
      pending_flush = 0;
      pending_cs = 0;

      const std::int64_t perceived = std::max(actual, vcfg.enforced_ns(i));
      now += perceived;

      const std::uint64_t c_now = ticks_now();
      if (keep_events) {
        out.log.switches.push_back({frame, board.id, cfg.boards[j].id, actual,
                                    perceived, c_now});
      }

      if (cfg.boards[j].role == BoardRole::receiver) {
        // TSB: timestamp the completed switch-in.
        const std::int64_t sample_frame = (j == 0) ? frame + 1 : frame;
        if (have_prev_sample) {
          out.trace.samples.push_back(
              {sample_frame, c_now - prev_receiver_ticks});
        } else {
          out.trace.meta.start_offset_ticks = c_now;
          have_prev_sample = true;
        }
        prev_receiver_ticks = c_now;
      }
    }
    ++frame;
  }

  out.log.end_time_ns = now;
  out.log.frames_completed = frame;
  return out;
}

}  // namespace simkernel

namespace simkernel {

std::vector<std::uint64_t> TimingTrace::deltas() const {
  std::vector<std::uint64_t> d;
  d.reserve(samples.size());
  for (const auto& s : samples) d.push_back(s.delta_ticks);
  return d;
}

std::uint64_t TimingTrace::digest() const {
  std::uint64_t h = tccsim::kFnvOffset;
  h = tccsim::fnv1a64_u64(meta.config_digest, h);
  h = tccsim::fnv1a64_u64(meta.seed, h);
  h = tccsim::fnv1a64_u64(meta.attack ? 1 : 0, h);
  h = tccsim::fnv1a64_u64(static_cast<std::uint64_t>(meta.counter_freq), h);
  h = tccsim::fnv1a64_u64(meta.start_offset_ticks, h);
  for (const auto& s : samples) {
    h = tccsim::fnv1a64_u64(static_cast<std::uint64_t>(s.frame_index), h);
    h = tccsim::fnv1a64_u64(s.delta_ticks, h);
  }
  return h;
}

}  // namespace simkernel
