#include "tccsim/attack.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "tccsim/stats.hpp"

namespace attackchan {

std::vector<int> parse_message_bits(const std::string& text) {
  std::vector<int> bits;
  auto push_nibble = [&](int v) {
    for (int i = 3; i >= 0; --i) bits.push_back((v >> i) & 1);
  };
  if (text.rfind("0x", 0) == 0 || text.rfind("0X", 0) == 0) {
    if (text.size() == 2) throw std::invalid_argument("empty hex message");
    for (std::size_t i = 2; i < text.size(); ++i) {
      const char c = text[i];
      if (c >= '0' && c <= '9') {
        push_nibble(c - '0');
      } else if (c >= 'a' && c <= 'f') {
        push_nibble(c - 'a' + 10);
      } else if (c >= 'A' && c <= 'F') {
        push_nibble(c - 'A' + 10);
      } else {
        throw std::invalid_argument(std::string("bad hex digit '") + c +
                                    "' in message");
      }
    }
    return bits;
  }
  std::size_t start = 0;
  if (text.rfind("0b", 0) == 0 || text.rfind("0B", 0) == 0) start = 2;
  if (start >= text.size()) throw std::invalid_argument("empty message");
  for (std::size_t i = start; i < text.size(); ++i) {
    if (text[i] == '0') {
      bits.push_back(0);
    } else if (text[i] == '1') {
      bits.push_back(1);
    } else {
      throw std::invalid_argument(std::string("bad bit '") + text[i] +
                                  "' in message");
    }
  }
  return bits;
}

std::string bits_to_string(const std::vector<int>& bits) {
  std::string s;
  s.reserve(bits.size());
  for (int b : bits) s += b ? '1' : '0';
  return s;
}

AttackPlan encode(const BitMessage& message, const BurstSpec& burst) {
  if (message.frames_per_bit < 1) {
    throw std::invalid_argument("encode: frames_per_bit must be >= 1");
  }
  if (message.bits.empty() && message.preamble_len == 0) {
    throw std::invalid_argument("encode: zero-length plan");
  }
  AttackPlan plan;
  auto push_bit = [&](int bit) {
    for (std::size_t f = 0; f < message.frames_per_bit; ++f) {
      plan.actions.push_back({bit == 1, burst});
    }
  };
  for (std::size_t i = 0; i < message.preamble_len; ++i) {
    push_bit(i % 2 == 0 ? 1 : 0);  // alternating 1010...
  }
  for (int b : message.bits) {
    if (b != 0 && b != 1) {
      throw std::invalid_argument("encode: bits must be 0 or 1");
    }
    push_bit(b);
  }
  return plan;
}

CalibrationOutcome calibrate_threshold(const simkernel::TimingTrace& trace,
                                       std::size_t preamble_len,
                                       std::size_t frames_per_bit,
                                       double alpha) {
  if (preamble_len < 2) {
    throw std::invalid_argument(
        "calibrate_threshold: need preamble_len >= 2 (both symbols)");
  }
  if (frames_per_bit < 1) {
    throw std::invalid_argument("calibrate_threshold: frames_per_bit >= 1");
  }
  const std::size_t need = preamble_len * frames_per_bit;
  if (trace.samples.size() < need) {
    throw std::invalid_argument(
        "calibrate_threshold: trace does not cover the preamble");
  }

  std::vector<std::uint64_t> ones, zeros;
  for (std::size_t i = 0; i < preamble_len; ++i) {
    const bool is_one = i % 2 == 0;
    for (std::size_t f = 0; f < frames_per_bit; ++f) {
      const auto delta = trace.samples[i * frames_per_bit + f].delta_ticks;
      (is_one ? ones : zeros).push_back(delta);
    }
  }

  const auto s1 = timestats::summarize(ones, 1);
  const auto s0 = timestats::summarize(zeros, 1);
  CalibrationOutcome out;
  out.preamble_one_mean = s1.mean;
  out.preamble_zero_mean = s0.mean;
  out.threshold_ticks = (s1.mean + s0.mean) / 2.0;

  if (s1.mean <= s0.mean) {
    out.channel_open = false;  // bursts do not slow the switch: closed
    return out;
  }
  if (s1.variance == 0.0 && s0.variance == 0.0) {
    out.channel_open = s1.mean != s0.mean;
    return out;
  }
  if (ones.size() >= 2 && zeros.size() >= 2) {
    // Separation must beat the jitter floor to count as a channel.
    const auto t = timestats::welch_t_test(ones, zeros, alpha);
    out.channel_open = t.reject;
  } else {
    out.channel_open = true;
  }
  return out;
}

DecodeResult decode(const simkernel::TimingTrace& trace,
                    double threshold_ticks, std::size_t frames_per_bit,
                    std::size_t preamble_len,
                    const std::vector<int>* ground_truth) {
  if (frames_per_bit < 1) {
    throw std::invalid_argument("decode: frames_per_bit must be >= 1");
  }
  DecodeResult out;
  out.threshold_ticks = threshold_ticks;

  const std::size_t skip = preamble_len * frames_per_bit;
  if (trace.samples.size() < skip) {
    out.partial = true;
    if (ground_truth) out.ber = 1.0;
    return out;
  }
  const std::size_t avail = trace.samples.size() - skip;
  const std::size_t n_bits = avail / frames_per_bit;
  out.partial = avail % frames_per_bit != 0;

  for (std::size_t i = 0; i < n_bits; ++i) {
    std::size_t votes_one = 0;
    double group_sum = 0.0;
    for (std::size_t f = 0; f < frames_per_bit; ++f) {
      const auto delta = static_cast<double>(
          trace.samples[skip + i * frames_per_bit + f].delta_ticks);
      group_sum += delta;
      if (delta > threshold_ticks) ++votes_one;
    }
    const double group_mean = group_sum / static_cast<double>(frames_per_bit);
    const std::size_t votes_zero = frames_per_bit - votes_one;
    int bit;
    if (votes_one != votes_zero) {
      bit = votes_one > votes_zero ? 1 : 0;
    } else {
      bit = group_mean > threshold_ticks ? 1 : 0;  // tie-break on the mean
    }
    out.decoded_bits.push_back(bit);
    out.per_bit_confidence.push_back(group_mean - threshold_ticks);
  }

  if (ground_truth) {
    const std::size_t compared = std::min(out.decoded_bits.size(),
                                          ground_truth->size());
    if (out.decoded_bits.size() < ground_truth->size()) out.partial = true;
    if (compared == 0) {
      out.ber = 1.0;
    } else {
      std::size_t errors = 0;
      for (std::size_t i = 0; i < compared; ++i) {
        if (out.decoded_bits[i] != (*ground_truth)[i]) ++errors;
      }
      out.ber = static_cast<double>(errors) / static_cast<double>(compared);
    }
  }
  return out;
}

}  // namespace attackchan
