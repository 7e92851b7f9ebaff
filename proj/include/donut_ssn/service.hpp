#ifndef DONUT_SSN_SERVICE_HPP
#define DONUT_SSN_SERVICE_HPP

#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "donut_ssn/aggregate.hpp"
#include "donut_ssn/ingest.hpp"
#include "donut_ssn/model.hpp"
#include "donut_ssn/render.hpp"

namespace donut {

/// Request bodies above this size are rejected with 413.
inline constexpr std::size_t kDefaultUploadLimit = 50u * 1024u * 1024u;

struct StoredNetwork {
  std::string id;
  std::string name;
  std::string created_at;  // ISO-8601 UTC
  SpatialNetwork network;
};

namespace detail {

inline std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path,
                       std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace detail

/// Hex SHA-256 of `data`.
inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

/// In-memory network registry with optional write-through to a directory of
/// canonical CSV files. Published entries are immutable; the map itself is
/// guarded by a reader/writer lock.
class NetworkStore {
 public:
  NetworkStore() = default;
  explicit NetworkStore(std::filesystem::path data_dir)
      : data_dir_(std::move(data_dir)) {
    std::filesystem::create_directories(*data_dir_);
  }

  std::shared_ptr<const StoredNetwork> add(SpatialNetwork network,
                                           std::string name = {}) {
    auto entry = std::make_shared<StoredNetwork>();
    entry->name = std::move(name);
    entry->created_at = detail::utc_now_iso8601();
    entry->network = std::move(network);

    std::unique_lock lock(mutex_);
    entry->id = "net" + std::to_string(++counter_);
    if (data_dir_) persist(*entry);
    entries_.emplace(entry->id, entry);
    return entry;
  }

  std::shared_ptr<const StoredNetwork> get(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(id);
    return it == entries_.end() ? nullptr : it->second;
  }

  std::vector<std::shared_ptr<const StoredNetwork>> list() const {
    std::shared_lock lock(mutex_);
    std::vector<std::shared_ptr<const StoredNetwork>> out;
    out.reserve(entries_.size());
    for (const auto& [id, entry] : entries_) out.push_back(entry);
    return out;
  }

  /// Loads every network previously written to the data directory. Returns
  /// the number loaded.
  std::size_t load() {
    if (!data_dir_) return 0;
    std::size_t loaded = 0;
    std::unique_lock lock(mutex_);
    for (const auto& file : std::filesystem::directory_iterator(*data_dir_)) {
      const std::string fname = file.path().filename().string();
      constexpr std::string_view kSuffix = ".meta.json";
      if (!fname.ends_with(kSuffix)) continue;
      const std::string id = fname.substr(0, fname.size() - kSuffix.size());
      const auto meta = nlohmann::json::parse(detail::read_file(file.path()));
      auto entry = std::make_shared<StoredNetwork>();
      entry->id = id;
      entry->name = meta.value("name", "");
      entry->created_at = meta.value("created_at", "");
      entry->network = parse_csv_network(
          detail::read_file(*data_dir_ / (id + ".nodes.csv")),
          detail::read_file(*data_dir_ / (id + ".edges.csv")),
          meta.value("directed", false), meta.value("geographic", false));
      if (id.starts_with("net")) {
        if (auto n = parse_number(std::string_view(id).substr(3)))
          counter_ = std::max(counter_, static_cast<std::uint64_t>(*n));
      }
      entries_[id] = std::move(entry);
      ++loaded;
    }
    return loaded;
  }

 private:
  void persist(const StoredNetwork& entry) const {
    const auto& dir = *data_dir_;
    detail::write_file(dir / (entry.id + ".nodes.csv"),
                       write_nodes_csv(entry.network));
    detail::write_file(dir / (entry.id + ".edges.csv"),
                       write_edges_csv(entry.network));
    const nlohmann::json meta = {{"name", entry.name},
                                 {"created_at", entry.created_at},
                                 {"directed", entry.network.directed()},
                                 {"geographic", entry.network.geographic()}};
    // Metadata last: its presence marks a complete entry for load().
    detail::write_file(dir / (entry.id + ".meta.json"), meta.dump() + "\n");
  }

  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const StoredNetwork>> entries_;
  std::uint64_t counter_ = 0;
  std::optional<std::filesystem::path> data_dir_;
};

/// Query parameters accepted by the donut endpoints.
struct DonutQuery {
  std::optional<Viewport> bbox;
  Thresholds thresholds;
  bool self_loops = false;
};

inline bool parse_bool_param(const std::string& name, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error("parameter " + name + " must be true or false");
}

inline DonutQuery parse_donut_query(const httplib::Request& req) {
  DonutQuery q;
  if (req.has_param("bbox")) q.bbox = parse_bbox(req.get_param_value("bbox"));
  auto number = [&](const char* name, double fallback) {
    if (!req.has_param(name)) return fallback;
    auto v = parse_number(req.get_param_value(name));
    if (!v) throw Error(std::string("parameter ") + name + " is not a number");
    return *v;
  };
  q.thresholds = checked_thresholds(number("near", q.thresholds.near_max),
                                    number("medium", q.thresholds.medium_max));
  if (req.has_param("self_loops"))
    q.self_loops =
        parse_bool_param("self_loops", req.get_param_value("self_loops"));
  return q;
}

inline nlohmann::json geometry_json(const SpatialNetwork& network) {
  using nlohmann::json;
  json nodes = json::array();
  for (const Node& n : network.nodes())
    nodes.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
  json edges = json::array();
  for (const Edge& e : network.edges())
    edges.push_back({{"src", e.src}, {"dst", e.dst}});
  json extent = nullptr;
  if (!network.nodes().empty()) {
    const Viewport v = extent_of(network);
    extent = {v.min_x, v.min_y, v.max_x, v.max_y};
  }
  return {{"nodes", std::move(nodes)},
          {"edges", std::move(edges)},
          {"directed", network.directed()},
          {"geographic", network.geographic()},
          {"extent", std::move(extent)}};
}

struct ServiceOptions {
  std::size_t upload_limit = kDefaultUploadLimit;
  std::optional<std::filesystem::path> assets_dir;
  bool log_requests = true;
};

namespace detail {

inline void send_error(httplib::Response& res, int status,
                       const std::string& message) {
  res.status = status;
  res.set_content(nlohmann::json{{"error", message}}.dump() + "\n",
                  "application/json");
}

/// Sets the body with a strong ETag, answering 304 when the client already
/// holds this representation.
inline void send_hashed(const httplib::Request& req, httplib::Response& res,
                        std::string body, const char* content_type) {
  const std::string etag = "\"" + sha256_hex(body) + "\"";
  res.set_header("ETag", etag);
  res.set_header("Cache-Control", "no-cache");
  if (req.get_header_value("If-None-Match") == etag) {
    res.status = 304;
    return;
  }
  res.set_content(std::move(body), content_type);
}

inline SpatialNetwork parse_upload(const httplib::Request& req) {
  const bool directed = req.has_param("directed") &&
                        parse_bool_param("directed", req.get_param_value("directed"));
  if (req.is_multipart_form_data()) {
    auto find = [&](const std::string& key) -> const httplib::MultipartFormData* {
      for (const auto& [name, file] : req.files)
        if (name == key || file.filename == key + ".csv" ||
            file.filename.ends_with("." + key + ".csv"))
          return &file;
      return nullptr;
    };
    const auto* nodes = find("nodes");
    const auto* edges = find("edges");
    if (!nodes || !edges)
      throw Error("multipart upload needs nodes.csv and edges.csv parts");
    const bool geographic =
        req.has_param("geographic") &&
        parse_bool_param("geographic", req.get_param_value("geographic"));
    return parse_csv_network(nodes->content, edges->content, directed,
                             geographic);
  }
  return parse_geojson_network(req.body, directed);
}

inline constexpr std::string_view kPlaceholderIndex = R"(<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>donut-ssn</title></head>
<body>
<h1>donut-ssn</h1>
<p>The viewer assets are not installed. API endpoints:</p>
<ul>
<li>POST /networks</li>
<li>GET /networks</li>
<li>GET /networks/{id}/geometry</li>
<li>GET /networks/{id}/donut?bbox=minx,miny,maxx,maxy&amp;near=0.35&amp;medium=0.60</li>
<li>GET /networks/{id}/donut.svg</li>
<li>GET /healthz</li>
</ul>
</body></html>
)";

}  // namespace detail

/// Installs every API route on `server`. The store must outlive the server.
inline void register_routes(httplib::Server& server, NetworkStore& store,
                            const ServiceOptions& options = {}) {
  using nlohmann::json;
  server.set_payload_max_length(options.upload_limit);

  if (options.log_requests) {
    server.set_logger([](const httplib::Request& req,
                         const httplib::Response& res) {
      std::fprintf(stderr, "%s %s %d %zu\n", req.method.c_str(),
                   req.target.c_str(), res.status, res.body.size());
    });
  }

  server.set_exception_handler([](const httplib::Request&,
                                  httplib::Response& res,
                                  std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      detail::send_error(res, 500, e.what());
    } catch (...) {
      detail::send_error(res, 500, "unknown error");
    }
  });

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });

  server.Post("/networks", [&store](const httplib::Request& req,
                                    httplib::Response& res) {
    std::shared_ptr<const StoredNetwork> entry;
    try {
      entry = store.add(detail::parse_upload(req),
                        req.has_param("name") ? req.get_param_value("name") : "");
    } catch (const Error& e) {
      detail::send_error(res, 400, e.what());
      return;
    }
    res.status = 201;
    res.set_header("Location", "/networks/" + entry->id);
    res.set_content(json{{"id", entry->id},
                         {"node_count", entry->network.nodes().size()},
                         {"edge_count", entry->network.edges().size()}}
                            .dump() + "\n",
                    "application/json");
  });

  server.Get("/networks", [&store](const httplib::Request&,
                                   httplib::Response& res) {
    json out = json::array();
    for (const auto& e : store.list())
      out.push_back({{"id", e->id},
                     {"name", e->name},
                     {"created_at", e->created_at},
                     {"directed", e->network.directed()},
                     {"node_count", e->network.nodes().size()},
                     {"edge_count", e->network.edges().size()}});
    res.set_content(out.dump() + "\n", "application/json");
  });

  server.Get(R"(/networks/([^/]+)/geometry)",
             [&store](const httplib::Request& req, httplib::Response& res) {
               auto entry = store.get(req.matches[1]);
               if (!entry) return detail::send_error(res, 404, "unknown network");
               res.set_content(geometry_json(entry->network).dump() + "\n",
                               "application/json");
             });

  // Shared by the JSON and SVG donut routes.
  auto donut_route = [&store](bool svg) {
    return [&store, svg](const httplib::Request& req, httplib::Response& res) {
      auto entry = store.get(req.matches[1]);
      if (!entry) return detail::send_error(res, 404, "unknown network");
      DonutAggregate agg;
      try {
        const DonutQuery q = parse_donut_query(req);
        agg = donut_for(entry->network, q.bbox, q.thresholds, q.self_loops);
      } catch (const Error& e) {
        return detail::send_error(res, 400, e.what());
      }
      if (svg)
        detail::send_hashed(req, res, render_donut(agg), "image/svg+xml");
      else
        detail::send_hashed(req, res, write_aggregate(agg), "application/json");
    };
  };
  server.Get(R"(/networks/([^/]+)/donut)", donut_route(false));
  server.Get(R"(/networks/([^/]+)/donut\.svg)", donut_route(true));

  if (options.assets_dir && std::filesystem::is_directory(*options.assets_dir)) {
    server.set_mount_point("/", options.assets_dir->string());
  } else {
    server.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(std::string(detail::kPlaceholderIndex), "text/html");
    });
  }
}

}  // namespace donut

#endif  // DONUT_SSN_SERVICE_HPP
