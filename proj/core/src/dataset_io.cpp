#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <string>

#include "binary_io.hpp"
#include "spiro/dataset.hpp"
#include "spiro/errors.hpp"

namespace spiro {

namespace {

constexpr std::string_view kMagic = "SPIRO-DATASET";

std::uint64_t record_bytes(int num_points) {
  // i32 l, i32 m, num_points * (f64, f64), num_points * u16
  return 8 + 18 * static_cast<std::uint64_t>(num_points);
}

std::string crc_hex(std::uint32_t crc) {
  char buf[9];
  std::snprintf(buf, sizeof(buf), "%08x", crc);
  return buf;
}

// Header text up to (not including) the checksum line.
std::string header_body(const DatasetManifest& m, std::uint64_t payload) {
  std::string h;
  h += std::string(kMagic) + " " + std::to_string(m.format_version) + "\n";
  h += "max_degree " + std::to_string(m.max_degree) + "\n";
  h += "num_fields " + std::to_string(m.num_fields) + "\n";
  h += "num_points " + std::to_string(m.num_points) + "\n";
  h += "spiral_c " + io::format_double(m.spiral_c) + "\n";
  h += "t_margin " + io::format_double(m.t_margin) + "\n";
  h += "bins " + std::to_string(m.bins) + "\n";
  h += "v_max " + io::format_double(m.v_max) + "\n";
  h += "seed " + std::to_string(m.seed) + "\n";
  h += "split_fraction " + io::format_double(m.split_fraction) + "\n";
  h += "payload_bytes " + std::to_string(payload) + "\n";
  return h;
}

struct ParsedHeader {
  DatasetManifest manifest;
  std::uint64_t payload_bytes = 0;
  std::uint32_t crc = 0;
  std::string_view payload;
};

// Splits off one '\n'-terminated line; a missing terminator means the file
// ends inside the header.
std::string_view next_line(std::string_view bytes, std::size_t& pos) {
  const auto nl = bytes.find('\n', pos);
  if (nl == std::string_view::npos) {
    throw TruncationError("dataset: truncated inside header");
  }
  auto line = bytes.substr(pos, nl - pos);
  pos = nl + 1;
  return line;
}

// The checksum covers every header byte before the crc32 line plus the
// payload.
ParsedHeader parse_header(std::string_view bytes) {
  // A short prefix of the magic is a truncated file; anything else is not ours.
  const auto lead = std::min(bytes.size(), kMagic.size());
  if (bytes.substr(0, lead) != kMagic.substr(0, lead)) {
    throw MalformedError("dataset: not a spiro dataset file (bad magic)");
  }
  std::size_t pos = 0;
  const auto first = next_line(bytes, pos);
  if (first.substr(0, kMagic.size()) != kMagic ||
      first.size() < kMagic.size() + 2 || first[kMagic.size()] != ' ') {
    throw MalformedError("dataset: not a spiro dataset file (bad magic)");
  }
  const auto version =
      io::parse_int(first.substr(kMagic.size() + 1), "format_version");
  if (version != kDatasetFormatVersion) {
    throw VersionMismatchError("dataset: format version " +
                               std::to_string(version) + ", expected " +
                               std::to_string(kDatasetFormatVersion));
  }

  std::map<std::string, std::string_view, std::less<>> kv;
  std::size_t crc_line_start = 0;
  std::string_view crc_value;
  for (;;) {
    const std::size_t line_start = pos;
    const auto line = next_line(bytes, pos);
    if (line.empty()) break;
    const auto sp = line.find(' ');
    if (sp == std::string_view::npos) {
      throw MalformedError("dataset: malformed header line '" +
                           std::string(line) + "'");
    }
    const auto key = line.substr(0, sp);
    const auto value = line.substr(sp + 1);
    if (key == "crc32") {
      crc_line_start = line_start;
      crc_value = value;
    } else {
      kv.emplace(std::string(key), value);
    }
  }
  if (crc_value.empty()) throw MalformedError("dataset: header lacks crc32");

  std::uint32_t crc = 0;
  auto res = std::from_chars(crc_value.data(),
                             crc_value.data() + crc_value.size(), crc, 16);
  if (res.ec != std::errc() || res.ptr != crc_value.data() + crc_value.size()) {
    // A damaged checksum line cannot match anything.
    throw ChecksumError("dataset: unreadable checksum '" +
                        std::string(crc_value) + "'");
  }

  auto field = [&](const char* name) -> std::string_view {
    auto it = kv.find(name);
    if (it == kv.end()) {
      throw MalformedError(std::string("dataset: header lacks '") + name + "'");
    }
    return it->second;
  };

  // Length first so a short file reads as truncation, then the checksum so
  // a damaged header value reads as corruption rather than a parse error.
  const auto remaining = bytes.size() - pos;
  std::uint64_t payload_bytes = 0;
  bool payload_known = true;
  try {
    payload_bytes = io::parse_u64(field("payload_bytes"), "payload_bytes");
  } catch (const MalformedError&) {
    payload_known = false;
  }
  if (payload_known && remaining < payload_bytes) {
    throw TruncationError("dataset: truncated payload (" +
                          std::to_string(remaining) + " of " +
                          std::to_string(payload_bytes) + " bytes)");
  }
  const std::uint32_t actual =
      io::crc32(bytes.substr(0, crc_line_start),
                payload_known ? bytes.substr(pos, payload_bytes) : bytes.substr(pos));
  if (actual != crc) {
    throw ChecksumError("dataset: checksum mismatch (stored " + crc_hex(crc) +
                        ", computed " + crc_hex(actual) + ")");
  }
  if (!payload_known) {
    throw MalformedError("dataset: malformed payload_bytes");
  }
  if (remaining > payload_bytes) {
    throw MalformedError("dataset: " +
                         std::to_string(remaining - payload_bytes) +
                         " trailing bytes after payload");
  }

  ParsedHeader h;
  DatasetManifest& m = h.manifest;
  m.format_version = static_cast<int>(version);
  m.max_degree = static_cast<int>(io::parse_int(field("max_degree"), "max_degree"));
  m.num_fields = static_cast<int>(io::parse_int(field("num_fields"), "num_fields"));
  m.num_points = static_cast<int>(io::parse_int(field("num_points"), "num_points"));
  m.spiral_c = io::parse_double(field("spiral_c"), "spiral_c");
  m.t_margin = io::parse_double(field("t_margin"), "t_margin");
  m.bins = static_cast<int>(io::parse_int(field("bins"), "bins"));
  m.v_max = io::parse_double(field("v_max"), "v_max");
  m.seed = io::parse_u64(field("seed"), "seed");
  m.split_fraction = io::parse_double(field("split_fraction"), "split_fraction");
  h.payload_bytes = payload_bytes;
  h.crc = crc;
  h.payload = bytes.substr(pos);
  return h;
}

}  // namespace

std::string serialize_dataset(const Dataset& ds) {
  ds.manifest.validate();
  if (ds.records.size() != static_cast<std::size_t>(ds.manifest.num_fields)) {
    throw ConfigError("dataset record count does not match manifest");
  }
  io::ByteWriter payload;
  for (const auto& rec : ds.records) {
    if (rec.components.size() != static_cast<std::size_t>(ds.manifest.num_points) ||
        rec.tokens.size() != rec.components.size()) {
      throw ConfigError("dataset record length does not match manifest");
    }
    payload.i32(rec.idx.degree);
    payload.i32(rec.idx.order);
    for (const auto& c : rec.components) {
      payload.f64(c[0]);
      payload.f64(c[1]);
    }
    for (int t : rec.tokens) payload.u16(static_cast<std::uint16_t>(t));
  }
  const std::string body = header_body(ds.manifest, payload.data().size());
  const std::uint32_t crc = io::crc32(body, payload.data());
  std::string out = body;
  out += "crc32 " + crc_hex(crc) + "\n\n";
  out += payload.data();
  return out;
}

DatasetSummary inspect_dataset(std::string_view bytes) {
  const ParsedHeader h = parse_header(bytes);
  return {h.manifest, h.payload_bytes, h.crc};
}

Dataset deserialize_dataset(std::string_view bytes) {
  const ParsedHeader h = parse_header(bytes);
  try {
    h.manifest.validate();
  } catch (const ConfigError& e) {
    throw MalformedError(std::string("dataset: inconsistent manifest: ") +
                         e.what());
  }
  const DatasetManifest& m = h.manifest;
  if (h.payload_bytes != record_bytes(m.num_points) * m.num_fields) {
    throw MalformedError("dataset: payload size disagrees with manifest");
  }
  const int vocab = m.bins * m.bins;
  Dataset ds;
  ds.manifest = m;
  ds.records.reserve(static_cast<std::size_t>(m.num_fields));
  io::ByteReader r(h.payload, "dataset");
  for (int f = 0; f < m.num_fields; ++f) {
    FieldRecord rec;
    rec.idx.degree = r.i32();
    rec.idx.order = r.i32();
    try {
      rec.idx.validate();
    } catch (const DomainError& e) {
      throw MalformedError(std::string("dataset: ") + e.what());
    }
    rec.components.resize(static_cast<std::size_t>(m.num_points));
    for (auto& c : rec.components) {
      c[0] = r.f64();
      c[1] = r.f64();
    }
    rec.tokens.resize(static_cast<std::size_t>(m.num_points));
    for (auto& t : rec.tokens) {
      t = r.u16();
      if (t >= vocab) {
        throw MalformedError("dataset: token id " + std::to_string(t) +
                             " outside vocabulary");
      }
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  io::write_file(path, serialize_dataset(dataset));
}

Dataset read_dataset(const std::filesystem::path& path) {
  return deserialize_dataset(io::read_file(path));
}

}  // namespace spiro
