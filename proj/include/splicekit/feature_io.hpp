#pragma once

#include "splicekit/common.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace splicekit {

// HTK parameter-kind codes and qualifier bits (octal, as in the HTK header).
namespace htk {
inline constexpr std::uint16_t kMfcc = 6;
inline constexpr std::uint16_t kUser = 9;
inline constexpr std::uint16_t kQualE = 0000100;
inline constexpr std::uint16_t kQualN = 0000200;
inline constexpr std::uint16_t kQualD = 0000400;
inline constexpr std::uint16_t kQualA = 0001000;
inline constexpr std::uint16_t kQualC = 0002000;  // compressed - rejected
inline constexpr std::uint16_t kQualZ = 0004000;
inline constexpr std::uint16_t kQualK = 0010000;  // CRC - rejected
inline constexpr std::uint16_t kQual0 = 0020000;
}  // namespace htk

// Frames plus the HTK header fields that survive a round trip.
struct FeatureFile {
  FeatureMatrix frames;
  std::int32_t sample_period = 100000;  // 100 ns units (10 ms default)
  std::uint16_t param_kind = htk::kUser;
};

// HTK binary layout: 12-byte big-endian header (frame count int32, sample
// period int32, sample size in bytes int16, parameter kind int16) followed by
// row-major 32-bit big-endian floats. read and write round-trip bit-exactly.
// Compressed (_C) and checksummed (_K) kinds are rejected, not mis-read.
FeatureFile read_htk(const std::filesystem::path& path);
void write_htk(const FeatureFile& file, const std::filesystem::path& path);

// In-memory variants backing the file functions.
FeatureFile parse_htk(const std::string& bytes, const std::string& origin = "<memory>");
std::string format_htk(const FeatureFile& file);

// One frame per line, comma separated, full round-trip precision.
FeatureMatrix read_csv(const std::filesystem::path& path);
void write_csv(const FeatureMatrix& frames, const std::filesystem::path& path);

// Per-utterance cepstral mean subtraction: column means become zero.
FeatureMatrix cms(const FeatureMatrix& frames);

// Reads .csv as text and anything else as HTK; used by manifest loading.
FeatureMatrix read_features(const std::filesystem::path& path, bool apply_cms);

struct ManifestRecord {
  std::string id;
  std::filesystem::path path;   // resolved against the manifest directory
  std::string condition;        // empty when the column holds "-"
  std::string partner;          // stereo partner id, empty when "-"
};

// Tab-separated corpus listing with header "id path condition partner".
// Ids are unique; every named partner resolves to an existing record.
struct CorpusManifest {
  std::vector<ManifestRecord> records;

  const ManifestRecord& by_id(const std::string& id) const;
  bool has_id(const std::string& id) const;
  // Records that declare a stereo partner (the noisy side of each pair).
  std::vector<const ManifestRecord*> stereo_records() const;

  std::map<std::string, std::size_t> index;
};

CorpusManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& path);

// Concatenates every record's frames (in manifest order).
FeatureMatrix load_all_frames(const CorpusManifest& manifest, bool apply_cms);

// Loads all stereo pairs; throws UsageError listing records without partners
// and FormatError on frame-count mismatches between partners.
struct StereoFrames {
  FeatureMatrix clean;
  FeatureMatrix noisy;
};
StereoFrames load_stereo_frames(const CorpusManifest& manifest, bool apply_cms);

}  // namespace splicekit
