#ifndef DONUT_SSN_INGEST_HPP
#define DONUT_SSN_INGEST_HPP

#include <charconv>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "donut_ssn/model.hpp"

namespace donut {

// Errors -----------------------------------------------------------------

class HeaderMismatch : public Error {
 public:
  HeaderMismatch(std::string expected, std::string got)
      : Error("header mismatch: expected \"" + expected + "\", got \"" + got +
              "\""),
        expected_(std::move(expected)),
        got_(std::move(got)) {}
  const std::string& expected() const { return expected_; }
  const std::string& got() const { return got_; }

 private:
  std::string expected_;
  std::string got_;
};

class BadNumber : public Error {
 public:
  BadNumber(std::size_t line, std::string column, std::string text)
      : Error("bad number \"" + text + "\" at line " + std::to_string(line) +
              ", column " + column),
        line_(line),
        column_(std::move(column)) {}
  std::size_t line() const { return line_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t line_;
  std::string column_;
};

class BadRecord : public Error {
 public:
  BadRecord(std::size_t line, std::string what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class NotFeatureCollection : public Error {
 public:
  NotFeatureCollection() : Error("document is not a GeoJSON FeatureCollection") {}
};

class MissingProperty : public Error {
 public:
  MissingProperty(std::size_t feature_index, std::string name)
      : Error("feature " + std::to_string(feature_index) +
              " is missing property \"" + name + "\""),
        feature_index_(feature_index),
        name_(std::move(name)) {}
  std::size_t feature_index() const { return feature_index_; }
  const std::string& name() const { return name_; }

 private:
  std::size_t feature_index_;
  std::string name_;
};

// Numbers ----------------------------------------------------------------

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_number(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_number(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
    text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t'))
    text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

/// Parses "min_x,min_y,max_x,max_y" into a valid viewport.
inline Viewport parse_bbox(std::string_view text) {
  std::vector<double> v;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    const auto part = text.substr(start, comma == std::string_view::npos
                                             ? std::string_view::npos
                                             : comma - start);
    auto num = parse_number(part);
    if (!num) throw Error("malformed bbox \"" + std::string(text) + "\"");
    v.push_back(*num);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (v.size() != 4)
    throw Error("malformed bbox \"" + std::string(text) +
                "\": expected min_x,min_y,max_x,max_y");
  return checked_viewport(v[0], v[1], v[2], v[3]);
}

// CSV --------------------------------------------------------------------

namespace csv {

struct Record {
  std::size_t line = 0;  // 1-based line the record starts on
  std::vector<std::string> fields;
};

/// RFC-4180 reader: comma separated, optional double-quote quoting with
/// "" escapes, \n or \r\n terminators. Blank lines are skipped.
inline std::vector<Record> read(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<Record> records;
  Record current;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_record = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    const bool blank = current.fields.size() == 1 &&
                       current.fields[0].empty() && !field_was_quoted;
    if (!blank) records.push_back(std::move(current));
    current = Record{};
    field_was_quoted = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        field_was_quoted = true;
        break;
      case ',':
        current.fields.push_back(std::move(field));
        field.clear();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field += c;
        break;
      case '\n':
        end_record();
        current.line = ++line;
        break;
      default:
        field += c;
    }
  }
  if (quoted) throw BadRecord(current.line, "unterminated quoted field");
  if (!field.empty() || !current.fields.empty() || field_was_quoted)
    end_record();
  return records;
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos)
    return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

}  // namespace csv

/// Parses a `id,x,y` nodes table and a `src,dst` edges table.
inline SpatialNetwork parse_csv_network(std::string_view nodes_text,
                                        std::string_view edges_text,
                                        bool directed, bool geographic) {
  static const std::vector<std::string> kNodeHeader{"id", "x", "y"};
  static const std::vector<std::string> kEdgeHeader{"src", "dst"};

  auto check_header = [](const std::vector<csv::Record>& rows,
                         const std::vector<std::string>& expected) {
    const std::string got = rows.empty() ? "" : csv::join(rows[0].fields);
    if (rows.empty() || rows[0].fields != expected)
      throw HeaderMismatch(csv::join(expected), got);
  };

  const auto node_rows = csv::read(nodes_text);
  check_header(node_rows, kNodeHeader);
  std::vector<Node> nodes;
  nodes.reserve(node_rows.size() - 1);
  for (std::size_t r = 1; r < node_rows.size(); ++r) {
    const auto& row = node_rows[r];
    if (row.fields.size() != 3)
      throw BadRecord(row.line, "expected 3 fields, got " +
                                    std::to_string(row.fields.size()));
    auto x = parse_number(row.fields[1]);
    if (!x) throw BadNumber(row.line, "x", row.fields[1]);
    auto y = parse_number(row.fields[2]);
    if (!y) throw BadNumber(row.line, "y", row.fields[2]);
    nodes.push_back(Node{row.fields[0], *x, *y});
  }

  const auto edge_rows = csv::read(edges_text);
  check_header(edge_rows, kEdgeHeader);
  std::vector<Edge> edges;
  edges.reserve(edge_rows.size() - 1);
  for (std::size_t r = 1; r < edge_rows.size(); ++r) {
    const auto& row = edge_rows[r];
    if (row.fields.size() != 2)
      throw BadRecord(row.line, "expected 2 fields, got " +
                                    std::to_string(row.fields.size()));
    edges.push_back(Edge{row.fields[0], row.fields[1]});
  }

  return validate_network(std::move(nodes), std::move(edges), directed,
                          geographic);
}

inline std::string write_nodes_csv(const SpatialNetwork& network) {
  std::string out = "id,x,y\n";
  for (const Node& n : network.nodes()) {
    out += csv::quote(n.id);
    out += ',';
    out += format_number(n.x);
    out += ',';
    out += format_number(n.y);
    out += '\n';
  }
  return out;
}

inline std::string write_edges_csv(const SpatialNetwork& network) {
  std::string out = "src,dst\n";
  for (const Edge& e : network.edges()) {
    out += csv::quote(e.src);
    out += ',';
    out += csv::quote(e.dst);
    out += '\n';
  }
  return out;
}

// GeoJSON ----------------------------------------------------------------

namespace detail {

inline std::optional<std::string> id_property(const nlohmann::json& props,
                                              const char* name) {
  if (!props.is_object()) return std::nullopt;
  auto it = props.find(name);
  if (it == props.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number()) return it->dump();
  return std::nullopt;
}

}  // namespace detail

/// Reads a FeatureCollection of Point node features (property `id`) and edge
/// features (properties `src`, `dst`). Edge geometry is ignored; node
/// coordinates are authoritative. The result is always geographic.
inline SpatialNetwork parse_geojson_network(std::string_view text,
                                            bool directed) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array())
    throw NotFeatureCollection();

  std::vector<Node> nodes;
  std::vector<Edge> edges;
  const auto& features = doc["features"];
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    if (!f.is_object())
      throw Error("feature " + std::to_string(i) + " is not an object");
    const nlohmann::json props =
        f.contains("properties") ? f["properties"] : nlohmann::json();
    const nlohmann::json geom =
        f.contains("geometry") ? f["geometry"] : nlohmann::json();
    const bool is_point = geom.is_object() && geom.value("type", "") == "Point";

    auto src = detail::id_property(props, "src");
    auto dst = detail::id_property(props, "dst");
    if (src && dst) {
      edges.push_back(Edge{std::move(*src), std::move(*dst)});
      continue;
    }
    if (!is_point) throw MissingProperty(i, src ? "dst" : "src");

    auto id = detail::id_property(props, "id");
    if (!id) throw MissingProperty(i, "id");
    const auto& coords = geom.contains("coordinates") ? geom["coordinates"]
                                                      : nlohmann::json();
    if (!coords.is_array() || coords.size() < 2 || !coords[0].is_number() ||
        !coords[1].is_number())
      throw Error("feature " + std::to_string(i) +
                  " has malformed Point coordinates");
    nodes.push_back(
        Node{std::move(*id), coords[0].get<double>(), coords[1].get<double>()});
  }
  return validate_network(std::move(nodes), std::move(edges), directed, true);
}

/// Emits nodes as Point features and edges as two-point LineStrings.
inline std::string write_geojson_network(const SpatialNetwork& network) {
  using nlohmann::json;
  json features = json::array();
  for (const Node& n : network.nodes()) {
    features.push_back({{"type", "Feature"},
                        {"geometry",
                         {{"type", "Point"}, {"coordinates", {n.x, n.y}}}},
                        {"properties", {{"id", n.id}}}});
  }
  const auto& nodes = network.nodes();
  const auto& ends = network.endpoints();
  for (std::size_t e = 0; e < network.edges().size(); ++e) {
    const Node& a = nodes[ends[e].first];
    const Node& b = nodes[ends[e].second];
    features.push_back(
        {{"type", "Feature"},
         {"geometry",
          {{"type", "LineString"},
           {"coordinates", json::array({{a.x, a.y}, {b.x, b.y}})}}},
         {"properties",
          {{"src", network.edges()[e].src}, {"dst", network.edges()[e].dst}}}});
  }
  json doc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
  return doc.dump() + "\n";
}

// Aggregate JSON ---------------------------------------------------------

/// Canonical aggregate document: fixed key order, no whitespace, shortest
/// round-trip numbers, trailing newline.
inline std::string write_aggregate(const DonutAggregate& agg) {
  auto opt = [](const std::optional<double>& v) {
    return v ? format_number(*v) : std::string("null");
  };
  const Viewport& v = agg.viewport;

  std::string out;
  out.reserve(640);
  out += "{\"node_count\":" + std::to_string(agg.node_count);
  out += ",\"contribution_total\":" + std::to_string(agg.contribution_total);
  out += ",\"directed\":";
  out += agg.directed ? "true" : "false";
  out += ",\"viewport\":[" + format_number(v.min_x) + "," +
         format_number(v.min_y) + "," + format_number(v.max_x) + "," +
         format_number(v.max_y) + "]";
  out += ",\"length_min\":" + opt(agg.length_min);
  out += ",\"length_max\":" + opt(agg.length_max);
  out += ",\"thresholds\":{\"near_max\":" +
         format_number(agg.thresholds.near_max) +
         ",\"medium_max\":" + format_number(agg.thresholds.medium_max) + "}";
  out += ",\"counts\":{";
  bool first = true;
  for (Direction d : kCanonicalDirections) {
    if (!first) out += ',';
    first = false;
    out += '"';
    out += to_string(d);
    out += "\":{";
    for (std::size_t b = 0; b < kBucketCount; ++b) {
      if (b) out += ',';
      out += '"';
      out += to_string(kBuckets[b]);
      out += "\":" + std::to_string(agg.at(d, kBuckets[b]));
    }
    out += '}';
  }
  out += "}}\n";
  return out;
}

inline DonutAggregate parse_aggregate(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("malformed JSON: ") + e.what());
  }
  try {
    DonutAggregate agg;
    agg.node_count = doc.at("node_count").get<std::uint64_t>();
    agg.contribution_total = doc.at("contribution_total").get<std::uint64_t>();
    agg.directed = doc.at("directed").get<bool>();
    const auto& vp = doc.at("viewport");
    if (!vp.is_array() || vp.size() != 4)
      throw Error("viewport must be a 4-element array");
    agg.viewport = checked_viewport(vp[0].get<double>(), vp[1].get<double>(),
                                    vp[2].get<double>(), vp[3].get<double>());
    if (!doc.at("length_min").is_null())
      agg.length_min = doc["length_min"].get<double>();
    if (!doc.at("length_max").is_null())
      agg.length_max = doc["length_max"].get<double>();
    const auto& th = doc.at("thresholds");
    agg.thresholds = checked_thresholds(th.at("near_max").get<double>(),
                                        th.at("medium_max").get<double>());
    const auto& counts = doc.at("counts");
    for (Direction d : kCanonicalDirections) {
      const auto& cell = counts.at(std::string(to_string(d)));
      for (DistanceBucket b : kBuckets)
        agg.at(d, b) = cell.at(std::string(to_string(b))).get<std::uint64_t>();
    }
    return agg;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed aggregate: ") + e.what());
  }
}

}  // namespace donut

#endif  // DONUT_SSN_INGEST_HPP
