#pragma once
// Channel line coding: bit message -> per-frame attack plan on the sender
// side; threshold calibration and majority-vote decoding on the receiver
// side. No delay = 0, delay = 1.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tccsim/attack_plan.hpp"
#include "tccsim/trace.hpp"

namespace attackchan {

struct BitMessage {
  std::vector<int> bits;           // values in {0, 1}
  std::size_t frames_per_bit = 3;  // repetition factor
  std::size_t preamble_len = 8;    // known training bits 1010... prepended
};

// Accepts "0x..." hex (MSB-first), "0b..." or bare binary strings.
// Throws std::invalid_argument on anything else.
std::vector<int> parse_message_bits(const std::string& text);
std::string bits_to_string(const std::vector<int>& bits);

// Deterministic mapping: bit 1 -> burst for each of its frames_per_bit
// frames, bit 0 -> idle. Preamble bits come first. Throws on an empty plan.
AttackPlan encode(const BitMessage& message, const BurstSpec& burst = {});

struct CalibrationOutcome {
  bool channel_open = false;  // false = "channel closed at calibration"
  double threshold_ticks = 0.0;
  double preamble_one_mean = 0.0;
  double preamble_zero_mean = 0.0;
};

// Threshold = midpoint between the mean delta over preamble-1 frames and
// preamble-0 frames. The channel is closed when the one-mean does not
// exceed the zero-mean or the separation is indistinguishable from jitter
// (Welch test at alpha on the two preamble groups). Throws if the trace
// does not cover the preamble or preamble_len < 2.
CalibrationOutcome calibrate_threshold(const simkernel::TimingTrace& trace,
                                       std::size_t preamble_len,
                                       std::size_t frames_per_bit,
                                       double alpha = 0.05);

struct DecodeResult {
  std::vector<int> decoded_bits;
  std::optional<double> ber;  // set only when ground truth was supplied
  double threshold_ticks = 0.0;
  std::vector<double> per_bit_confidence;  // signed margin, ticks
  bool partial = false;  // trace shorter than the expected plan
};

// Majority vote per bit over frames_per_bit deltas against the threshold.
// Samples are consumed after skipping preamble_len * frames_per_bit of
// them (sample k carries plan action k by construction).
DecodeResult decode(const simkernel::TimingTrace& trace,
                    double threshold_ticks, std::size_t frames_per_bit,
                    std::size_t preamble_len = 0,
                    const std::vector<int>* ground_truth = nullptr);

}  // namespace attackchan
