#pragma once

#include <filesystem>
#include <iosfwd>

#include "tdk/dataset.hpp"
#include "tdk/feature_pipeline.hpp"

namespace tdk {

/// Binary dataset layout, all little-endian:
///   "TDK1", u32 K, u32 dims[K], u64 N, u32 C,
///   N * prod(dims) f64 sample values (each sample in tensor linearization),
///   N u32 labels (0-based).
void write_dataset(std::ostream& out, const LabeledDataset& data);
LabeledDataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const LabeledDataset& data);
LabeledDataset load_dataset(const std::filesystem::path& path);

inline constexpr int kModelFormatVersion = 1;

/// JSON document holding the full decoder (blocks, whitener, mask, LDA).
/// Doubles are written with round-trip precision so a loaded decoder produces
/// bit-identical scores.
void write_decoder(std::ostream& out, const Decoder& decoder);
Decoder read_decoder(std::istream& in);
void save_decoder(const std::filesystem::path& path, const Decoder& decoder);
Decoder load_decoder(const std::filesystem::path& path);

}  // namespace tdk
