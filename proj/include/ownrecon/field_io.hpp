#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ownrecon/field.hpp"
#include "ownrecon/sampling.hpp"

namespace ownrecon {

enum class PayloadKind { complex64, float32, bool_packed };

std::string to_string(PayloadKind kind);

inline constexpr int kFieldFormatVersion = 1;
inline constexpr const char* kFieldMagic = "OWNRECON-FIELD";

/// One container for images, k-space, masks, feature maps and probes.
///
/// On disk: a text header, one "key value" pair per line,
///   OWNRECON-FIELD
///   version 1
///   kind complex64 | float32 | bool_packed
///   channels C
///   height H
///   width W
///   bytes N
///   meta <single-line JSON, optional>
///   end
/// followed by N payload bytes, little-endian, channel-major then row-major.
/// complex64 stores interleaved (real, imag) float32 pairs; bool_packed
/// stores one bit per entry, least significant bit first.
struct FieldFile {
  PayloadKind kind = PayloadKind::complex64;
  Index channels = 1;
  Index height = 0;
  Index width = 0;
  std::vector<std::complex<float>> complex_values;
  std::vector<float> real_values;
  std::vector<std::uint8_t> bool_values;  // one entry per element, 0 or 1
  std::string meta;                        // free-form JSON, may be empty

  Index elements() const { return channels * height * width; }
  std::uint64_t payload_bytes() const;

  bool operator==(const FieldFile&) const = default;
};

void write_field(const std::filesystem::path& path, const FieldFile& field);

/// Throws FormatError naming the failing header field; never returns a
/// partially read field.
FieldFile read_field(const std::filesystem::path& path);

// Conversions. Complex and real data are stored in single precision.
FieldFile to_field_file(const std::vector<ComplexField>& channels);
FieldFile to_field_file(const ComplexField& field);
FieldFile to_field_file(const FeatureMapF& map);
FieldFile to_field_file(const SampleMask& mask);

std::vector<ComplexField> complex_channels(const FieldFile& f);
ComplexField complex_field(const FieldFile& f);  // requires one channel
FeatureMapF feature_map(const FieldFile& f);
SampleMask sample_mask(const FieldFile& f);

}  // namespace ownrecon
