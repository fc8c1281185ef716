#include "ownrecon/field_io.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ownrecon {

std::string to_string(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::complex64: return "complex64";
    case PayloadKind::float32: return "float32";
    case PayloadKind::bool_packed: return "bool_packed";
  }
  return "unknown";
}

std::uint64_t FieldFile::payload_bytes() const {
  const auto n = static_cast<std::uint64_t>(elements());
  switch (kind) {
    case PayloadKind::complex64: return n * 8;
    case PayloadKind::float32: return n * 4;
    case PayloadKind::bool_packed: return (n + 7) / 8;
  }
  return 0;
}

namespace {

void put_u32(std::string& out, std::uint32_t bits) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void check_sizes(const FieldFile& f) {
  const auto n = static_cast<size_t>(f.elements());
  const size_t have = f.kind == PayloadKind::complex64 ? f.complex_values.size()
                      : f.kind == PayloadKind::float32 ? f.real_values.size()
                                                       : f.bool_values.size();
  if (have != n)
    throw FormatError("bytes", "payload holds " + std::to_string(have) + " values, dims need " + std::to_string(n));
}

std::string header_value(std::istream& is, const std::string& key) {
  std::string line;
  if (!std::getline(is, line)) throw FormatError(key, "header ends before '" + key + "'");
  if (line.rfind(key + " ", 0) != 0) throw FormatError(key, "expected '" + key + "', got '" + line + "'");
  return line.substr(key.size() + 1);
}

long long header_int(std::istream& is, const std::string& key) {
  const std::string text = header_value(is, key);
  try {
    size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw FormatError(key, "not an integer: '" + text + "'");
  }
}

}  // namespace

void write_field(const std::filesystem::path& path, const FieldFile& f) {
  check_sizes(f);
  if (f.meta.find('\n') != std::string::npos) throw FormatError("meta", "metadata must be a single line");
  std::ostringstream header;
  header << kFieldMagic << "\n"
         << "version " << kFieldFormatVersion << "\n"
         << "kind " << to_string(f.kind) << "\n"
         << "channels " << f.channels << "\n"
         << "height " << f.height << "\n"
         << "width " << f.width << "\n"
         << "bytes " << f.payload_bytes() << "\n";
  if (!f.meta.empty()) header << "meta " << f.meta << "\n";
  header << "end\n";

  std::string payload;
  payload.reserve(static_cast<size_t>(f.payload_bytes()));
  switch (f.kind) {
    case PayloadKind::complex64:
      for (const auto& v : f.complex_values) {
        put_u32(payload, std::bit_cast<std::uint32_t>(v.real()));
        put_u32(payload, std::bit_cast<std::uint32_t>(v.imag()));
      }
      break;
    case PayloadKind::float32:
      for (float v : f.real_values) put_u32(payload, std::bit_cast<std::uint32_t>(v));
      break;
    case PayloadKind::bool_packed:
      payload.assign(static_cast<size_t>(f.payload_bytes()), '\0');
      for (size_t i = 0; i < f.bool_values.size(); ++i)
        if (f.bool_values[i]) payload[i / 8] = static_cast<char>(static_cast<unsigned char>(payload[i / 8]) | (1u << (i % 8)));
      break;
  }

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << header.str();
  os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

FieldFile read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");

  std::string magic;
  if (!std::getline(is, magic) || magic != kFieldMagic) throw FormatError("magic", "not a field file");
  const long long version = header_int(is, "version");
  if (version != kFieldFormatVersion)
    throw FormatError("version", "unsupported field format version " + std::to_string(version));

  FieldFile f;
  const std::string kind = header_value(is, "kind");
  if (kind == "complex64")
    f.kind = PayloadKind::complex64;
  else if (kind == "float32")
    f.kind = PayloadKind::float32;
  else if (kind == "bool_packed")
    f.kind = PayloadKind::bool_packed;
  else
    throw FormatError("kind", "unknown payload kind '" + kind + "'");

  const long long channels = header_int(is, "channels");
  const long long height = header_int(is, "height");
  const long long width = header_int(is, "width");
  if (channels < 1) throw FormatError("channels", "must be >= 1");
  if (height < 1) throw FormatError("height", "must be >= 1");
  if (width < 1) throw FormatError("width", "must be >= 1");
  f.channels = static_cast<Index>(channels);
  f.height = static_cast<Index>(height);
  f.width = static_cast<Index>(width);

  const long long bytes = header_int(is, "bytes");
  if (bytes < 0 || static_cast<std::uint64_t>(bytes) != f.payload_bytes())
    throw FormatError("bytes", "declared " + std::to_string(bytes) + " bytes, dims and kind need " +
                                   std::to_string(f.payload_bytes()));

  std::string line;
  if (!std::getline(is, line)) throw FormatError("end", "header is not terminated");
  if (line.rfind("meta ", 0) == 0) {
    f.meta = line.substr(5);
    if (!std::getline(is, line)) throw FormatError("end", "header is not terminated");
  }
  if (line != "end") throw FormatError("end", "expected 'end', got '" + line + "'");

  std::vector<unsigned char> payload((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (payload.size() < static_cast<size_t>(bytes))
    throw FormatError("bytes", "payload truncated: " + std::to_string(payload.size()) + " of " +
                                   std::to_string(bytes) + " bytes");
  if (payload.size() > static_cast<size_t>(bytes))
    throw FormatError("bytes", "payload has " + std::to_string(payload.size() - static_cast<size_t>(bytes)) +
                                   " trailing bytes");

  const auto n = static_cast<size_t>(f.elements());
  switch (f.kind) {
    case PayloadKind::complex64:
      f.complex_values.resize(n);
      for (size_t i = 0; i < n; ++i)
        f.complex_values[i] = {std::bit_cast<float>(get_u32(&payload[8 * i])),
                               std::bit_cast<float>(get_u32(&payload[8 * i + 4]))};
      break;
    case PayloadKind::float32:
      f.real_values.resize(n);
      for (size_t i = 0; i < n; ++i) f.real_values[i] = std::bit_cast<float>(get_u32(&payload[4 * i]));
      break;
    case PayloadKind::bool_packed:
      f.bool_values.resize(n);
      for (size_t i = 0; i < n; ++i) f.bool_values[i] = (payload[i / 8] >> (i % 8)) & 1u;
      break;
  }
  return f;
}

FieldFile to_field_file(const std::vector<ComplexField>& channels) {
  if (channels.empty()) throw ShapeError("no channels to store");
  FieldFile f;
  f.kind = PayloadKind::complex64;
  f.channels = static_cast<Index>(channels.size());
  f.height = channels[0].rows();
  f.width = channels[0].cols();
  f.complex_values.reserve(static_cast<size_t>(f.elements()));
  for (const auto& c : channels) {
    if (c.rows() != f.height || c.cols() != f.width) throw ShapeError("channels differ in size");
    for (Index i = 0; i < c.rows(); ++i)
      for (Index j = 0; j < c.cols(); ++j) f.complex_values.emplace_back(static_cast<std::complex<float>>(c(i, j)));
  }
  return f;
}

FieldFile to_field_file(const ComplexField& field) { return to_field_file(std::vector<ComplexField>{field}); }

FieldFile to_field_file(const FeatureMapF& map) {
  FieldFile f;
  f.kind = PayloadKind::float32;
  f.channels = map.channels;
  f.height = map.height;
  f.width = map.width;
  f.real_values.assign(map.data.data(), map.data.data() + map.data.size());
  return f;
}

FieldFile to_field_file(const SampleMask& mask) {
  FieldFile f;
  f.kind = PayloadKind::bool_packed;
  f.channels = 1;
  f.height = mask.height;
  f.width = mask.width;
  f.bool_values.reserve(static_cast<size_t>(mask.bits.size()));
  for (Index i = 0; i < mask.height; ++i)
    for (Index j = 0; j < mask.width; ++j) f.bool_values.push_back(mask.bits(i, j) ? 1 : 0);
  nlohmann::ordered_json meta;
  meta["mask_kind"] = to_string(mask.kind);
  meta["acceleration"] = mask.acceleration;
  meta["center_fraction"] = mask.center_fraction;
  meta["spokes"] = mask.spokes;
  meta["seed"] = mask.seed;
  f.meta = meta.dump();
  return f;
}

std::vector<ComplexField> complex_channels(const FieldFile& f) {
  if (f.kind != PayloadKind::complex64) throw FormatError("kind", "expected complex64 payload");
  check_sizes(f);
  std::vector<ComplexField> out;
  size_t k = 0;
  for (Index c = 0; c < f.channels; ++c) {
    ComplexField field(f.height, f.width);
    for (Index i = 0; i < f.height; ++i)
      for (Index j = 0; j < f.width; ++j) field(i, j) = static_cast<std::complex<double>>(f.complex_values[k++]);
    out.push_back(std::move(field));
  }
  return out;
}

ComplexField complex_field(const FieldFile& f) {
  if (f.channels != 1) throw FormatError("channels", "expected a single-channel field");
  return complex_channels(f)[0];
}

FeatureMapF feature_map(const FieldFile& f) {
  if (f.kind != PayloadKind::float32) throw FormatError("kind", "expected float32 payload");
  check_sizes(f);
  FeatureMapF map;
  map.channels = f.channels;
  map.height = f.height;
  map.width = f.width;
  map.data = Eigen::Map<const RowMatrix<float>>(f.real_values.data(), f.channels, f.height * f.width);
  return map;
}

SampleMask sample_mask(const FieldFile& f) {
  if (f.kind != PayloadKind::bool_packed) throw FormatError("kind", "expected bool_packed payload");
  if (f.channels != 1) throw FormatError("channels", "a mask has one channel");
  check_sizes(f);
  SampleMask m;
  m.height = f.height;
  m.width = f.width;
  m.bits.resize(f.height, f.width);
  for (Index i = 0; i < f.height; ++i)
    for (Index j = 0; j < f.width; ++j) m.bits(i, j) = f.bool_values[static_cast<size_t>(i * f.width + j)] != 0;
  if (!f.meta.empty()) {
    try {
      const auto meta = nlohmann::json::parse(f.meta);
      m.kind = parse_mask_kind(meta.value("mask_kind", std::string("equispaced")));
      m.acceleration = meta.value("acceleration", 1.0);
      m.center_fraction = meta.value("center_fraction", 0.0);
      m.spokes = meta.value("spokes", 0);
      m.seed = meta.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("meta", e.what());
    } catch (const ConfigError& e) {
      throw FormatError("meta", e.what());
    }
  }
  try {
    validate(m);
  } catch (const Error& e) {
    throw FormatError("payload", e.what());
  }
  return m;
}

}  // namespace ownrecon
