#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "proofpad/error.hpp"
#include "proofpad/lex.hpp"

namespace proofpad {

enum class Access { ReadWrite, ReadOnly };

inline std::string_view to_string(Access a) {
  return a == Access::ReadOnly ? "read-only" : "read-write";
}

struct Region {
  Span span;
  Access access = Access::ReadWrite;

  friend bool operator==(const Region&, const Region&) = default;
};

enum class Origin { Plain, Proofpad };

/// Text plus a partition into regions. Regions are disjoint, ordered, and
/// cover the text; a read-only region spans its marker lines. Empty regions
/// occur only between two read-only regions or as the sole region of an
/// empty document.
struct Document {
  std::string text;
  std::vector<Region> regions;
  Origin origin = Origin::Plain;
  std::string header;  // verbatim header line of a .proofpad file, terminator included

  friend bool operator==(const Document&, const Document&) = default;
};

namespace docformat {
inline constexpr std::string_view kHeader = ";; proofpad:v1";
inline constexpr std::string_view kBegin = ";; proofpad:readonly:begin";
inline constexpr std::string_view kEnd = ";; proofpad:readonly:end";
inline constexpr std::string_view kExtension = ".proofpad";
}  // namespace docformat

namespace detail {

/// Line content without its terminator ("\n" or "\r\n").
inline std::string_view line_body(std::string_view line) {
  if (line.ends_with('\n')) line.remove_suffix(1);
  if (line.ends_with('\r')) line.remove_suffix(1);
  return line;
}

/// Appends a region unless it is empty.
inline void push_region(std::vector<Region>& out, std::size_t start, std::size_t end, Access a) {
  if (end > start) out.push_back({{start, end}, a});
}

}  // namespace detail

/// Regions partition the text in order, and empty regions sit only between
/// two read-only regions (or alone in an empty document).
inline bool well_formed(const Document& doc) {
  if (doc.regions.empty()) return false;
  std::size_t at = 0;
  for (std::size_t i = 0; i < doc.regions.size(); ++i) {
    const Region& r = doc.regions[i];
    if (r.span.start != at || r.span.end < r.span.start) return false;
    bool interior = i > 0 && i + 1 < doc.regions.size() && doc.regions[i - 1].access == Access::ReadOnly &&
                    doc.regions[i + 1].access == Access::ReadOnly;
    if (r.span.size() == 0 && doc.regions.size() > 1 && !interior) return false;
    at = r.span.end;
  }
  return at == doc.text.size();
}

/// One read-write region over `text`.
inline Document plain_document(std::string text) {
  Document doc;
  doc.regions.push_back({{0, text.size()}, Access::ReadWrite});
  doc.text = std::move(text);
  return doc;
}

/// Parses `.proofpad` bytes: the header line, then text in which marker lines
/// delimit read-only blocks. Markers stay in the text.
inline Document parse_proofpad(std::string_view bytes) {
  std::size_t nl = bytes.find('\n');
  std::string_view first = bytes.substr(0, nl == std::string_view::npos ? bytes.size() : nl + 1);
  if (detail::line_body(first) != docformat::kHeader) {
    throw Error(ErrorCode::MalformedProofpad, "missing ;; proofpad:v1 header");
  }
  Document doc;
  doc.origin = Origin::Proofpad;
  doc.header = std::string(first);
  doc.text = std::string(bytes.substr(first.size()));

  std::string_view text = doc.text;
  std::size_t rw_start = 0;
  std::size_t ro_start = 0;
  bool inside = false;
  std::size_t pos = 0;
  std::size_t line_no = 2;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    end = end == std::string_view::npos ? text.size() : end + 1;
    std::string_view body = detail::line_body(text.substr(pos, end - pos));
    if (body == docformat::kBegin) {
      if (inside) throw Error(ErrorCode::MalformedProofpad, "nested readonly:begin at line " + std::to_string(line_no));
      if (doc.regions.empty()) detail::push_region(doc.regions, rw_start, pos, Access::ReadWrite);
      else doc.regions.push_back({{rw_start, pos}, Access::ReadWrite});
      ro_start = pos;
      inside = true;
    } else if (body == docformat::kEnd) {
      if (!inside) throw Error(ErrorCode::MalformedProofpad, "readonly:end without begin at line " + std::to_string(line_no));
      detail::push_region(doc.regions, ro_start, end, Access::ReadOnly);
      rw_start = end;
      inside = false;
    }
    pos = end;
    ++line_no;
  }
  if (inside) throw Error(ErrorCode::MalformedProofpad, "readonly:begin is never closed");
  detail::push_region(doc.regions, rw_start, text.size(), Access::ReadWrite);
  if (doc.regions.empty()) doc.regions.push_back({{0, 0}, Access::ReadWrite});
  return doc;
}

/// File bytes for `doc`; parse_proofpad inverts this for proofpad documents.
inline std::string serialize(const Document& doc) {
  if (doc.origin == Origin::Plain) return doc.text;
  std::string header = doc.header.empty() ? std::string(docformat::kHeader) + "\n" : doc.header;
  return header + doc.text;
}

inline bool is_proofpad_path(const std::filesystem::path& path) {
  return path.extension() == docformat::kExtension;
}

/// Reads `path`; `.proofpad` files are parsed for regions, anything else is
/// plain text.
inline Document load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return is_proofpad_path(path) ? parse_proofpad(ss.str()) : plain_document(ss.str());
}

inline void save(const Document& doc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << serialize(doc);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

/// Index of the read-write region that wholly contains `span`, or npos.
/// An empty span at a boundary belongs to the read-write side.
inline std::size_t writable_region(const Document& doc, Span span) {
  for (std::size_t i = 0; i < doc.regions.size(); ++i) {
    const Region& r = doc.regions[i];
    if (r.access == Access::ReadWrite && span.start >= r.span.start && span.end <= r.span.end) return i;
  }
  return static_cast<std::size_t>(-1);
}

/// Replaces `span` with `replacement`. Succeeds iff the span lies inside one
/// read-write region and the result still round-trips through the file
/// format (no marker lines created or displaced).
inline Document apply_edit(const Document& doc, Span span, std::string_view replacement) {
  if (span.start > span.end || span.end > doc.text.size()) {
    throw Error(ErrorCode::PreconditionViolation, "edit span lies outside the document");
  }
  if (span.size() == 0 && replacement.empty()) return doc;
  std::size_t idx = writable_region(doc, span);
  if (idx == static_cast<std::size_t>(-1)) {
    throw Error(ErrorCode::ReadOnlyViolation, "edit at " + std::to_string(span.start) + "-" + std::to_string(span.end) + " touches a read-only region");
  }
  Document out = doc;
  out.text.replace(span.start, span.size(), replacement);
  const auto delta = static_cast<std::ptrdiff_t>(replacement.size()) - static_cast<std::ptrdiff_t>(span.size());
  out.regions[idx].span.end = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(out.regions[idx].span.end) + delta);
  for (std::size_t i = idx + 1; i < out.regions.size(); ++i) {
    out.regions[i].span.start = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(out.regions[i].span.start) + delta);
    out.regions[i].span.end = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(out.regions[i].span.end) + delta);
  }
  if (out.origin == Origin::Proofpad) {
    Document reparsed = [&] {
      try {
        return parse_proofpad(serialize(out));
      } catch (const Error&) {
        throw Error(ErrorCode::ReadOnlyViolation, "edit would alter a read-only marker");
      }
    }();
    // Also catches emptying an edge region, which the file format elides.
    if (reparsed.regions != out.regions) throw Error(ErrorCode::ReadOnlyViolation, "edit would change the region layout");
  }
  return out;
}

}  // namespace proofpad
