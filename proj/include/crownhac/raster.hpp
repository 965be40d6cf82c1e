#pragma once

/// @file raster.hpp
/// @brief Labeled segmentation rasters: loading, ISOL extraction and writing.
///
/// A raster holds one non-negative label per pixel. Label 0 marks interstitial
/// (valley) material; every positive label names one ISOL. ISOLs are defined
/// purely by label equality, so a label split across two blobs is still one ISOL.

#include <algorithm>
#include <cctype>
#include <compare>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crownhac {

using IsolId = std::uint32_t;
using Label = std::uint32_t;
/// Row-major linear pixel index (y * width + x).
using PixelIndex = std::uint32_t;

struct PixelCoord {
  std::int32_t x = 0;
  std::int32_t y = 0;

  // Row-major order: y first.
  friend constexpr auto operator<=>(const PixelCoord& a, const PixelCoord& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
  friend constexpr bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Decoding failure. Row and column are 1-based; 0 means "not applicable".
class RasterError : public std::runtime_error {
 public:
  RasterError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
      : std::runtime_error(format(what, row, column)), row_(row), column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t row, std::size_t column) {
    if (row == 0 && column == 0) return what;
    std::ostringstream os;
    os << what << " (row " << row;
    if (column != 0) os << ", column " << column;
    os << ")";
    return os.str();
  }

  std::size_t row_;
  std::size_t column_;
};

class LabeledRaster {
 public:
  LabeledRaster(std::size_t width, std::size_t height, std::vector<Label> labels)
      : width_(width), height_(height), labels_(std::move(labels)) {
    if (width_ == 0 || height_ == 0) throw RasterError("raster dimensions must be positive");
    if (labels_.size() != width_ * height_) throw RasterError("label count does not match width*height");
    if (width_ * height_ > std::numeric_limits<PixelIndex>::max())
      throw RasterError("raster too large");
  }

  LabeledRaster(std::size_t width, std::size_t height)
      : LabeledRaster(width, height, std::vector<Label>(width * height, 0)) {}

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return labels_.size(); }

  bool contains(std::int64_t x, std::int64_t y) const {
    return x >= 0 && y >= 0 && x < static_cast<std::int64_t>(width_) &&
           y < static_cast<std::int64_t>(height_);
  }

  PixelIndex index(PixelCoord p) const {
    return static_cast<PixelIndex>(static_cast<std::size_t>(p.y) * width_ + static_cast<std::size_t>(p.x));
  }
  PixelCoord coord(PixelIndex i) const {
    return {static_cast<std::int32_t>(i % width_), static_cast<std::int32_t>(i / width_)};
  }

  Label at(std::size_t x, std::size_t y) const { return labels_[y * width_ + x]; }
  Label at(PixelCoord p) const { return labels_[index(p)]; }
  void set(PixelCoord p, Label v) { labels_[index(p)] = v; }

  std::span<const Label> labels() const { return labels_; }

  friend bool operator==(const LabeledRaster&, const LabeledRaster&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<Label> labels_;
};

/// One segment. Pixel lists are sorted row-major; edge_pixels is exactly the
/// subset of pixels with a 4-neighbour outside the ISOL (raster border counts).
struct Isol {
  IsolId id = 0;
  std::vector<PixelCoord> pixels;
  std::vector<PixelCoord> edge_pixels;
};

enum class RasterFormat { text_grid, pgm };

namespace detail {

inline bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

// Parses a non-negative decimal token; returns nullopt on anything else.
inline std::optional<std::uint64_t> parse_uint(const std::string& tok) {
  if (tok.empty() || tok.size() > 19) return std::nullopt;
  std::uint64_t v = 0;
  for (char c : tok) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

inline LabeledRaster load_text_grid(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::pair<std::size_t, std::size_t>> header;
  std::vector<Label> labels;
  std::size_t width = 0;
  std::size_t rows = 0;
  bool saw_blank_after_data = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    if (!line.empty() && line.front() == '#') {
      if (rows != 0 || header) throw RasterError("header must be the first line", line_no);
      std::istringstream hs(line.substr(1));
      std::string wtok, htok, extra;
      hs >> wtok >> htok;
      auto w = parse_uint(wtok);
      auto h = parse_uint(htok);
      if (!w || !h || (hs >> extra)) throw RasterError("malformed header, expected '# width height'", line_no);
      if (*w == 0 || *h == 0) throw RasterError("header dimensions must be positive", line_no);
      header = std::make_pair(static_cast<std::size_t>(*w), static_cast<std::size_t>(*h));
      continue;
    }
    if (is_blank(line)) {
      if (rows != 0) saw_blank_after_data = true;
      continue;
    }
    if (saw_blank_after_data) throw RasterError("blank line inside raster data", line_no);

    std::istringstream ls(line);
    std::string tok;
    std::size_t col = 0;
    while (ls >> tok) {
      ++col;
      if (!tok.empty() && tok.front() == '-') throw RasterError("negative label '" + tok + "'", rows + 1, col);
      auto v = parse_uint(tok);
      if (!v) throw RasterError("non-integer cell '" + tok + "'", rows + 1, col);
      if (*v > std::numeric_limits<Label>::max()) throw RasterError("label out of range", rows + 1, col);
      labels.push_back(static_cast<Label>(*v));
    }
    if (rows == 0) {
      width = col;
    } else if (col != width) {
      std::ostringstream os;
      os << "row has " << col << " cells, expected " << width;
      throw RasterError(os.str(), rows + 1, std::min(col, width) + 1);
    }
    ++rows;
  }

  if (rows == 0) throw RasterError("raster has no rows");
  if (header) {
    if (header->first != width) {
      std::ostringstream os;
      os << "dimension mismatch: header width " << header->first << ", data width " << width;
      throw RasterError(os.str(), 1);
    }
    if (header->second != rows) {
      std::ostringstream os;
      os << "dimension mismatch: header height " << header->second << ", data height " << rows;
      throw RasterError(os.str(), rows);
    }
  }
  return LabeledRaster(width, rows, std::move(labels));
}

// Reads one PGM header token, skipping whitespace and '#' comments.
inline std::string pgm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

inline LabeledRaster load_pgm(std::istream& in) {
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") throw RasterError("malformed header: expected P2 or P5 magic");
  auto w = parse_uint(pgm_token(in));
  auto h = parse_uint(pgm_token(in));
  auto maxval = parse_uint(pgm_token(in));
  if (!w || !h || !maxval) throw RasterError("malformed header: width, height and maxval expected");
  if (*w == 0 || *h == 0) throw RasterError("malformed header: dimensions must be positive");
  if (*maxval == 0 || *maxval > 65535) throw RasterError("malformed header: maxval must be in 1..65535");

  const std::size_t width = *w, height = *h;
  std::vector<Label> labels;
  labels.reserve(width * height);

  if (magic == "P2") {
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const std::string tok = pgm_token(in);
        if (tok.empty()) throw RasterError("dimension mismatch: truncated pixel data", y + 1, x + 1);
        if (tok.front() == '-') throw RasterError("negative label '" + tok + "'", y + 1, x + 1);
        auto v = parse_uint(tok);
        if (!v) throw RasterError("non-integer cell '" + tok + "'", y + 1, x + 1);
        if (*v > *maxval) throw RasterError("label exceeds maxval", y + 1, x + 1);
        labels.push_back(static_cast<Label>(*v));
      }
    }
    if (!pgm_token(in).empty()) throw RasterError("dimension mismatch: extra pixel data", height);
  } else {
    // The single whitespace byte after maxval was consumed by pgm_token.
    const std::size_t bytes_per = *maxval < 256 ? 1 : 2;
    std::vector<unsigned char> buf(width * height * bytes_per);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got != buf.size()) {
      const std::size_t px = got / bytes_per;
      throw RasterError("dimension mismatch: truncated pixel data", px / width + 1, px % width + 1);
    }
    for (std::size_t i = 0; i < width * height; ++i) {
      Label v = bytes_per == 1 ? buf[i] : static_cast<Label>((buf[2 * i] << 8) | buf[2 * i + 1]);
      if (v > *maxval) throw RasterError("label exceeds maxval", i / width + 1, i % width + 1);
      labels.push_back(v);
    }
  }
  return LabeledRaster(width, height, std::move(labels));
}

}  // namespace detail

inline LabeledRaster load_raster(std::istream& in, RasterFormat format) {
  return format == RasterFormat::pgm ? detail::load_pgm(in) : detail::load_text_grid(in);
}

inline LabeledRaster load_raster_string(const std::string& text, RasterFormat format = RasterFormat::text_grid) {
  std::istringstream in(text);
  return load_raster(in, format);
}

/// Picks pgm for .pgm files, text-grid otherwise.
inline RasterFormat guess_format(const std::string& path) {
  auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == "pgm") return RasterFormat::pgm;
  }
  return RasterFormat::text_grid;
}

inline LabeledRaster load_raster_file(const std::string& path, RasterFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RasterError("cannot open '" + path + "'");
  return load_raster(in, format);
}

inline void write_text_grid(std::ostream& out, const LabeledRaster& r, bool header = true) {
  if (header) out << "# " << r.width() << ' ' << r.height() << '\n';
  for (std::size_t y = 0; y < r.height(); ++y) {
    for (std::size_t x = 0; x < r.width(); ++x) {
      if (x) out << ' ';
      out << r.at(x, y);
    }
    out << '\n';
  }
}

/// Binary PGM; 8-bit when every label fits, 16-bit big-endian otherwise.
inline void write_pgm(std::ostream& out, const LabeledRaster& r) {
  Label maxlabel = 0;
  for (Label v : r.labels()) maxlabel = std::max(maxlabel, v);
  if (maxlabel > 65535) throw RasterError("label too large for PGM output");
  const Label maxval = std::max<Label>(maxlabel, 1);
  out << "P5\n" << r.width() << ' ' << r.height() << '\n' << maxval << '\n';
  for (Label v : r.labels()) {
    if (maxval < 256) {
      out.put(static_cast<char>(v));
    } else {
      out.put(static_cast<char>(v >> 8));
      out.put(static_cast<char>(v & 0xFF));
    }
  }
}

/// One Isol per distinct positive label, sorted by id.
inline std::vector<Isol> extract_isols(const LabeledRaster& r) {
  std::map<IsolId, Isol> by_id;
  const auto w = static_cast<std::int64_t>(r.width());
  const auto h = static_cast<std::int64_t>(r.height());
  for (std::int64_t y = 0; y < h; ++y) {
    for (std::int64_t x = 0; x < w; ++x) {
      const Label v = r.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
      if (v == 0) continue;
      auto [it, fresh] = by_id.try_emplace(v);
      if (fresh) it->second.id = v;
      const PixelCoord p{static_cast<std::int32_t>(x), static_cast<std::int32_t>(y)};
      it->second.pixels.push_back(p);

      auto outside = [&](std::int64_t nx, std::int64_t ny) {
        return !r.contains(nx, ny) || r.at(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)) != v;
      };
      if (outside(x - 1, y) || outside(x + 1, y) || outside(x, y - 1) || outside(x, y + 1))
        it->second.edge_pixels.push_back(p);
    }
  }
  std::vector<Isol> out;
  out.reserve(by_id.size());
  for (auto& [id, isol] : by_id) out.push_back(std::move(isol));
  return out;
}

/// Finds an ISOL by id in a list sorted by id; nullptr when absent.
inline const Isol* find_isol(std::span<const Isol> isols, IsolId id) {
  auto it = std::lower_bound(isols.begin(), isols.end(), id,
                             [](const Isol& a, IsolId v) { return a.id < v; });
  return (it != isols.end() && it->id == id) ? &*it : nullptr;
}

struct ClusterGroup {
  Label group_id = 0;
  std::vector<IsolId> members;
};

/// Paints every member ISOL with its group id; everything else becomes 0.
inline LabeledRaster write_cluster_raster(const LabeledRaster& r, std::span<const ClusterGroup> groups) {
  std::map<Label, Label> relabel;
  std::vector<bool> present;
  for (Label v : r.labels()) {
    if (v >= present.size()) present.resize(static_cast<std::size_t>(v) + 1, false);
    present[v] = true;
  }
  for (const auto& g : groups) {
    if (g.group_id == 0) throw std::invalid_argument("group id 0 is reserved for background");
    for (IsolId m : g.members) {
      if (m == 0 || m >= present.size() || !present[m])
        throw std::invalid_argument("unknown ISOL id " + std::to_string(m));
      if (!relabel.emplace(m, g.group_id).second)
        throw std::invalid_argument("ISOL " + std::to_string(m) + " appears in more than one group");
    }
  }
  std::vector<Label> out(r.size(), 0);
  auto labels = r.labels();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) continue;
    if (auto it = relabel.find(labels[i]); it != relabel.end()) out[i] = it->second;
  }
  return LabeledRaster(r.width(), r.height(), std::move(out));
}

}  // namespace crownhac
