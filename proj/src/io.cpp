#include "dslga/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "dslga/errors.hpp"

namespace dslga {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
  buf.push_back(static_cast<char>((v >> 16) & 0xff));
  buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const std::string& buf, std::size_t offset) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(buf[offset])) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[offset + 1])) << 8) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[offset + 2])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(buf[offset + 3])) << 24);
}

void atomic_write(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open " + tmp + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FileError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string encode_matrix(const Eigen::MatrixXd& m) {
  const std::uint32_t n = static_cast<std::uint32_t>(m.rows());
  const std::uint32_t d = static_cast<std::uint32_t>(m.cols());
  std::string buf;
  buf.reserve(16 + 4ull * n * d);
  buf.append(kMagic, 4);
  put_u32(buf, kVersion);
  put_u32(buf, n);
  put_u32(buf, d);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) {
      const float f = static_cast<float>(m(i, j));
      if (!std::isfinite(f)) {
        throw NonFiniteError("refusing to write non-finite value", buf.size());
      }
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32(buf, bits);
    }
  }
  return buf;
}

Eigen::MatrixXd decode_matrix(const std::string& buf, const std::string& path) {
  if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw BadMagicError("bad magic in " + path, 0);
  }
  if (buf.size() < 16) {
    throw TruncatedPayloadError("truncated header in " + path, buf.size());
  }
  const std::uint32_t version = get_u32(buf, 4);
  if (version != kVersion) {
    throw UnsupportedVersionError(
        "unsupported version " + std::to_string(version) + " in " + path, 4);
  }
  const std::uint32_t n = get_u32(buf, 8);
  const std::uint32_t d = get_u32(buf, 12);
  const std::size_t expected = 16 + 4ull * n * d;
  if (buf.size() < expected) {
    throw TruncatedPayloadError("payload ends early in " + path, buf.size());
  }
  if (buf.size() > expected) {
    throw TrailingDataError("unexpected bytes after payload in " + path,
                            expected);
  }
  Eigen::MatrixXd m(n, d);
  std::size_t offset = 16;
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < d; ++j, offset += 4) {
      const std::uint32_t bits = get_u32(buf, offset);
      float f;
      std::memcpy(&f, &bits, 4);
      if (!std::isfinite(f)) {
        throw NonFiniteError("non-finite value in " + path, offset);
      }
      m(i, j) = static_cast<double>(f);
    }
  }
  return m;
}

}  // namespace

void write_matrix(const Eigen::MatrixXd& m, const std::string& path) {
  atomic_write(path, encode_matrix(m));
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  return decode_matrix(read_file(path), path);
}

void write_metadata(const EmbeddingSet& set, const std::string& path) {
  set.check_consistent();
  std::string out = "sample_id,domain,modality,label,camera_id\n";
  for (int i = 0; i < set.n(); ++i) {
    const std::size_t u = static_cast<std::size_t>(i);
    const std::string id =
        set.sample_id.empty() ? std::to_string(i) : set.sample_id[u];
    const int cam = set.camera_id.empty() ? i : set.camera_id[u];
    out += id;
    out += ',';
    out += to_string(set.domain[u]);
    out += ',';
    out += to_string(set.modality[u]);
    out += ',';
    out += std::to_string(set.label[u]);
    out += ',';
    out += std::to_string(cam);
    out += '\n';
  }
  atomic_write(path, out);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

int parse_int(const std::string& s, int line_no, const char* what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw MetadataParseError(std::string("bad ") + what + " '" + s + "'",
                             line_no);
  }
}

}  // namespace

EmbeddingSet read_embeddings(const std::string& embedding_path,
                             const std::string& metadata_path) {
  EmbeddingSet set;
  set.data = read_matrix(embedding_path);

  std::ifstream in(metadata_path);
  if (!in) throw FileError("cannot open " + metadata_path);
  std::string line;
  int line_no = 0;
  std::set<std::string> seen_ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line.rfind("sample_id,", 0) != 0) {
        throw MetadataParseError("missing metadata header", 1);
      }
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 5) {
      throw MetadataParseError("expected 5 fields, got " +
                                   std::to_string(fields.size()),
                               line_no);
    }
    if (!seen_ids.insert(fields[0]).second) {
      throw MetadataParseError("duplicate sample_id '" + fields[0] + "'",
                               line_no);
    }
    set.sample_id.push_back(fields[0]);
    if (fields[1] == "source") {
      set.domain.push_back(Domain::source);
    } else if (fields[1] == "target") {
      set.domain.push_back(Domain::target);
    } else {
      throw MetadataParseError("unknown domain '" + fields[1] + "'", line_no);
    }
    if (fields[2] == "visible") {
      set.modality.push_back(Modality::visible);
    } else if (fields[2] == "infrared") {
      set.modality.push_back(Modality::infrared);
    } else {
      throw MetadataParseError("unknown modality '" + fields[2] + "'", line_no);
    }
    const int label = parse_int(fields[3], line_no, "label");
    if (label < -1) throw MetadataParseError("label below -1", line_no);
    set.label.push_back(label);
    set.camera_id.push_back(parse_int(fields[4], line_no, "camera_id"));
  }

  if (static_cast<Eigen::Index>(set.label.size()) != set.data.rows()) {
    throw RowCountMismatchError(
        "metadata has " + std::to_string(set.label.size()) + " rows but " +
        embedding_path + " has " + std::to_string(set.data.rows()));
  }
  return set;
}

void write_embeddings(const EmbeddingSet& set,
                      const std::string& embedding_path,
                      const std::string& metadata_path) {
  write_matrix(set.data, embedding_path);
  write_metadata(set, metadata_path);
}

void write_text_file(const std::string& text, const std::string& path) {
  atomic_write(path, text);
}

}  // namespace dslga
