#include "twk/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace twk {

Dataset::Dataset(std::vector<std::string> names, std::vector<double> values)
    : names_(std::move(names)), values_(std::move(values)) {
  if (names_.empty()) {
    throw std::invalid_argument("Dataset: no features");
  }
  if (values_.size() % names_.size() != 0) {
    throw std::invalid_argument("Dataset: values not divisible by feature count");
  }
}

namespace {

std::vector<std::string> splitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trimmed(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace

Dataset Dataset::loadCsv(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw ParseError("load_csv: cannot open " + path);
  }
  std::string line;
  if (!std::getline(is, line)) {
    throw ParseError("load_csv: empty file " + path);
  }
  std::vector<std::string> names;
  for (auto& cell : splitCsvLine(line)) {
    names.push_back(trimmed(cell));
  }
  const std::size_t F = names.size();
  std::vector<double> values;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) {
      continue;
    }
    const auto cells = splitCsvLine(line);
    if (cells.size() != F) {
      std::ostringstream msg;
      msg << "load_csv: row " << row << " has " << cells.size()
          << " cells, expected " << F;
      throw ParseError(msg.str());
    }
    for (std::size_t c = 0; c < F; ++c) {
      const std::string cell = trimmed(cells[c]);
      double v = 0.0;
      const auto rc = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (rc.ec != std::errc{} || rc.ptr != cell.data() + cell.size() ||
          !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "load_csv: non-numeric cell at row " << row << ", column "
            << (c + 1) << " ('" << cell << "')";
        throw ParseError(msg.str());
      }
      values.push_back(v);
    }
  }
  if (values.empty()) {
    throw ParseError("load_csv: no data rows in " + path);
  }
  return Dataset(std::move(names), std::move(values));
}

void Dataset::normalize(Normalization kind) {
  if (norm_ != Normalization::none) {
    throw std::logic_error("Dataset: already normalized");
  }
  if (kind == Normalization::none) {
    return;
  }
  const std::size_t R = rows();
  const std::size_t F = features();
  offsets_.assign(F, 0.0);
  scales_.assign(F, 1.0);
  for (std::size_t f = 0; f < F; ++f) {
    if (kind == Normalization::minmax) {
      double lo = at(0, f), hi = at(0, f);
      for (std::size_t r = 1; r < R; ++r) {
        lo = std::min(lo, at(r, f));
        hi = std::max(hi, at(r, f));
      }
      offsets_[f] = lo;
      scales_[f] = (hi > lo) ? (hi - lo) : 1.0;
    } else {
      double mean = 0.0;
      for (std::size_t r = 0; r < R; ++r) mean += at(r, f);
      mean /= static_cast<double>(R);
      double var = 0.0;
      for (std::size_t r = 0; r < R; ++r) {
        var += (at(r, f) - mean) * (at(r, f) - mean);
      }
      var /= static_cast<double>(R);
      offsets_[f] = mean;
      scales_[f] = (var > 0.0) ? std::sqrt(var) : 1.0;
    }
  }
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t f = 0; f < F; ++f) {
      at(r, f) = (at(r, f) - offsets_[f]) / scales_[f];
    }
  }
  norm_ = kind;
}

void Dataset::denormalize() {
  if (norm_ == Normalization::none) {
    return;
  }
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t f = 0; f < features(); ++f) {
      at(r, f) = at(r, f) * scales_[f] + offsets_[f];
    }
  }
  norm_ = Normalization::none;
  offsets_.clear();
  scales_.clear();
}

SeriesTensor window(const Dataset& ds, std::size_t W, std::size_t stride) {
  if (stride < 1) {
    throw std::invalid_argument("window: stride must be >= 1");
  }
  if (W < 1 || W > ds.rows()) {
    throw std::invalid_argument("window: window larger than dataset");
  }
  const std::size_t B = (ds.rows() - W) / stride + 1;
  SeriesTensor out(B, W, ds.features());
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t w = 0; w < W; ++w) {
      for (std::size_t f = 0; f < ds.features(); ++f) {
        out.at(b, w, f) = ds.at(b * stride + w, f);
      }
    }
  }
  return out;
}

namespace {

void putU32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

std::uint32_t takeU32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) {
    throw std::runtime_error("load_tensor: truncated file " + path);
  }
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
         std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

void atomicWrite(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) {
      throw std::runtime_error("cannot write " + tmp);
    }
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) {
      throw std::runtime_error("write failed for " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void save_tensor(const SeriesTensor& x, const std::string& path) {
  std::string buf;
  buf.reserve(20 + 8 * x.size());
  buf.append("TWK1");
  putU32(buf, 1);
  putU32(buf, static_cast<std::uint32_t>(x.batch()));
  putU32(buf, static_cast<std::uint32_t>(x.window()));
  putU32(buf, static_cast<std::uint32_t>(x.features()));
  for (double v : x.flat()) {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
    }
  }
  atomicWrite(path, buf);
}

SeriesTensor load_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw std::runtime_error("load_tensor: cannot open " + path);
  }
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "TWK1", 4) != 0) {
    throw std::runtime_error("load_tensor: bad magic in " + path);
  }
  const std::uint32_t version = takeU32(is, path);
  if (version != 1) {
    throw std::runtime_error("load_tensor: unsupported version in " + path);
  }
  const std::uint32_t B = takeU32(is, path);
  const std::uint32_t W = takeU32(is, path);
  const std::uint32_t F = takeU32(is, path);
  const std::size_t count = std::size_t(B) * W * F;
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) {
      throw std::runtime_error("load_tensor: truncated file " + path);
    }
    std::uint64_t bits = 0;
    for (int k = 7; k >= 0; --k) {
      bits = (bits << 8) | b[k];
    }
    double v;
    std::memcpy(&v, &bits, sizeof v);
    values[i] = v;
  }
  return SeriesTensor(B, W, F, std::move(values));
}

void write_text_file(const std::string& path, const std::string& content) {
  atomicWrite(path, content);
}

}  // namespace twk
