#pragma once

#include <span>

#include "mtc/capture/session.hpp"
#include "mtc/dataset/corpus.hpp"
#include "mtc/features/tensor.hpp"

namespace mtc::features {

/// First 784 session payload bytes (both directions, packet order) scaled to [0,1].
/// Throws InsufficientPayload when the session carries fewer bytes.
FeatureTensor extract_raw784(const capture::Session& s);

/// extract_raw784 reshaped row-major to 28x28.
FeatureTensor extract_img28(const capture::Session& s);

/// Row k holds the first n payload bytes of packet k (zero padded), for the
/// first m packets; missing packets give zero rows.
FeatureTensor extract_deepmal(const capture::Session& s, std::uint32_t m, std::uint32_t n);

/// Row k: (payload length, +1 forward / -1 backward, seconds since previous packet).
FeatureTensor extract_pktseq(const capture::Session& s, std::uint32_t p);

/// Slot layout of extract_stats.
namespace stats_slot {
// per direction block; backward block starts at kBackward
inline constexpr std::size_t kCount = 0;
inline constexpr std::size_t kBytes = 1;
inline constexpr std::size_t kSizeMin = 2;
inline constexpr std::size_t kSizeMean = 3;
inline constexpr std::size_t kSizeMax = 4;
inline constexpr std::size_t kSizeStd = 5;
inline constexpr std::size_t kIatMean = 6;
inline constexpr std::size_t kIatStd = 7;
inline constexpr std::size_t kForward = 0;
inline constexpr std::size_t kBackward = 8;
// whole session
inline constexpr std::size_t kDuration = 16;
inline constexpr std::size_t kPacketsPerSecond = 17;
inline constexpr std::size_t kBytesPerSecond = 18;
inline constexpr std::size_t kForwardRatio = 19;
inline constexpr std::size_t kSynCount = 20;
inline constexpr std::size_t kFinRstCount = 21;
inline constexpr std::size_t kDistinctSizes = 22;
inline constexpr std::size_t kMeanEntropy = 23;
} // namespace stats_slot

/// 24 flow statistics. Standard deviations are population (divide by N);
/// statistics undefined for a direction with too few packets are 0.
/// Entropy is Shannon bits per byte, averaged over packets with payload.
FeatureTensor extract_stats(const capture::Session& s);

/// Dispatches on `repr.kind`.
FeatureTensor extract(const capture::Session& s, const ReprSpec& repr);

/// Extracts every session into one batch. OpenMP-parallel over sessions.
TensorBatch extract_batch(std::span<const dataset::LabeledSession> sessions, const ReprSpec& repr);
/// Single-threaded reference for extract_batch.
TensorBatch extract_batch_serial(std::span<const dataset::LabeledSession> sessions, const ReprSpec& repr);

} // namespace mtc::features
