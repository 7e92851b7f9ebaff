// donut-ssn: generate synthetic spatial networks, aggregate them into
// direction/distance donuts, render SVG, and serve the HTTP API.
//
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>

#include "donut_ssn/aggregate.hpp"
#include "donut_ssn/ingest.hpp"
#include "donut_ssn/render.hpp"
#include "donut_ssn/service.hpp"
#include "donut_ssn/synth.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<donut::Point> parse_centers(const std::string& text) {
  std::vector<donut::Point> centers;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto semi = text.find(';', start);
    if (semi == std::string::npos) semi = text.size();
    const std::string item = text.substr(start, semi - start);
    const auto comma = item.find(',');
    if (comma == std::string::npos)
      throw UsageError("bad --centers entry \"" + item + "\", expected x,y");
    auto x = donut::parse_number(std::string_view(item).substr(0, comma));
    auto y = donut::parse_number(std::string_view(item).substr(comma + 1));
    if (!x || !y)
      throw UsageError("bad --centers entry \"" + item + "\", expected x,y");
    centers.push_back({*x, *y});
    start = semi + 1;
  }
  return centers;
}

void write_network(const donut::SpatialNetwork& net, const std::string& prefix) {
  donut::detail::write_file(prefix + ".nodes.csv", donut::write_nodes_csv(net));
  donut::detail::write_file(prefix + ".edges.csv", donut::write_edges_csv(net));
  std::cout << "nodes: " << net.nodes().size() << "\n"
            << "edges: " << net.edges().size() << "\n";
}

struct DonutArgs {
  std::string nodes;
  std::string edges;
  std::string geojson;
  bool directed = false;
  bool geographic = false;
  std::string bbox;
  double near_max = donut::Thresholds{}.near_max;
  double medium_max = donut::Thresholds{}.medium_max;
  bool self_loops = false;
  std::string json_out;
  std::string svg_out;
};

int run_donut(const DonutArgs& args) {
  if (!(args.near_max <= args.medium_max) || args.near_max < 0.0 ||
      args.medium_max > 1.0)
    throw UsageError("thresholds must satisfy near_max <= medium_max (both in [0, 1])");
  const bool csv = !args.nodes.empty() || !args.edges.empty();
  if (csv == !args.geojson.empty())
    throw UsageError("give either --nodes and --edges, or --geojson");
  if (csv && (args.nodes.empty() || args.edges.empty()))
    throw UsageError("--nodes and --edges must be given together");

  std::optional<donut::Viewport> bbox;
  if (!args.bbox.empty()) {
    try {
      bbox = donut::parse_bbox(args.bbox);
    } catch (const donut::Error& e) {
      throw UsageError(e.what());
    }
  }

  using donut::detail::read_file;
  const donut::SpatialNetwork net =
      csv ? donut::parse_csv_network(read_file(args.nodes), read_file(args.edges),
                                     args.directed, args.geographic)
          : donut::parse_geojson_network(read_file(args.geojson), args.directed);

  const auto agg = donut::donut_for(
      net, bbox, donut::Thresholds{args.near_max, args.medium_max},
      args.self_loops);
  const std::string json = donut::write_aggregate(agg);

  if (args.json_out.empty() && args.svg_out.empty()) {
    std::cout << json;
    return 0;
  }
  if (!args.json_out.empty()) donut::detail::write_file(args.json_out, json);
  if (!args.svg_out.empty())
    donut::detail::write_file(args.svg_out, donut::render_donut(agg));
  std::cout << "node_count: " << agg.node_count << "\n"
            << "contribution_total: " << agg.contribution_total << "\n";
  return 0;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  std::string assets;
};

int run_serve(const ServeArgs& args) {
  // Route SIGINT/SIGTERM to a dedicated thread so shutdown happens outside
  // signal-handler context. Worker threads inherit the blocked mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<donut::NetworkStore> store;
  if (args.data_dir.empty()) {
    store = std::make_unique<donut::NetworkStore>();
  } else {
    store = std::make_unique<donut::NetworkStore>(args.data_dir);
    const auto n = store->load();
    std::cerr << "loaded " << n << " network(s) from " << args.data_dir << "\n";
  }

  donut::ServiceOptions options;
  if (!args.assets.empty()) options.assets_dir = args.assets;

  httplib::Server server;
  // The library default is SO_REUSEPORT, which would let a second instance
  // share an occupied port instead of failing.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  donut::register_routes(server, *store, options);

  int port = args.port;
  if (port == 0) {
    port = server.bind_to_any_port(args.host);
    if (port < 0) port = 0;
  } else if (!server.bind_to_port(args.host, port)) {
    port = 0;
  }
  if (port == 0) {
    std::cerr << "error: cannot bind " << args.host << ":" << args.port << "\n";
    return kExitRuntime;
  }
  std::cout << "listening on http://" << args.host << ":" << port << std::endl;

  std::thread waiter([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    std::cerr << "shutting down\n";
    server.stop();
  });
  const bool ok = server.listen_after_bind();
  if (waiter.joinable()) {
    // listen_after_bind only returns early on failure; wake the waiter.
    if (!ok) pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
  return ok ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direction/distance donut summaries of spatial social networks"};
  app.require_subcommand(1);

  // generate ---------------------------------------------------------------
  auto* generate = app.add_subcommand("generate", "Generate a synthetic network");
  generate->require_subcommand(1);

  donut::PoissonSpec poisson;
  std::string poisson_out;
  auto* gen_poisson = generate->add_subcommand(
      "poisson", "Uniform Poisson process with distance-decay links");
  gen_poisson->add_option("--intensity", poisson.intensity,
                          "Expected node count over the unit square")
      ->capture_default_str();
  gen_poisson->add_option("--decay", poisson.decay_scale,
                          "Decay scale lambda of p = beta * exp(-d / lambda)")
      ->capture_default_str();
  gen_poisson->add_option("--beta", poisson.base_prob, "Connection probability at d = 0")
      ->capture_default_str();
  gen_poisson->add_option("--seed", poisson.seed, "PRNG seed")->capture_default_str();
  gen_poisson->add_option("--out", poisson_out, "Output prefix")->required();

  donut::ClusterSpec clustered;
  std::string clustered_out;
  std::string centers_text;
  auto* gen_clustered = generate->add_subcommand(
      "clustered", "Gaussian clusters with distance-decay links");
  gen_clustered->add_option("--centers", centers_text,
                            "Cluster centers as x,y;x,y;...");
  gen_clustered->add_option("--per-cluster", clustered.per_cluster_mean,
                            "Expected nodes per cluster")
      ->capture_default_str();
  gen_clustered->add_option("--sigma", clustered.spread, "Cluster standard deviation")
      ->capture_default_str();
  gen_clustered->add_option("--decay", clustered.decay_scale, "Decay scale lambda")
      ->capture_default_str();
  gen_clustered->add_option("--beta", clustered.base_prob,
                            "Connection probability at d = 0")
      ->capture_default_str();
  gen_clustered->add_option("--seed", clustered.seed, "PRNG seed")->capture_default_str();
  gen_clustered->add_option("--out", clustered_out, "Output prefix")->required();

  // donut ------------------------------------------------------------------
  DonutArgs donut_args;
  auto* donut_cmd = app.add_subcommand("donut", "Aggregate a network into a donut");
  donut_cmd->add_option("--nodes", donut_args.nodes, "Nodes CSV (id,x,y)");
  donut_cmd->add_option("--edges", donut_args.edges, "Edges CSV (src,dst)");
  donut_cmd->add_option("--geojson", donut_args.geojson, "GeoJSON FeatureCollection");
  donut_cmd->add_flag("--directed", donut_args.directed, "Treat edges as directed");
  donut_cmd->add_flag("--geographic", donut_args.geographic,
                      "CSV coordinates are lon/lat degrees (haversine lengths)");
  donut_cmd->add_option("--bbox", donut_args.bbox,
                        "Viewport minx,miny,maxx,maxy (default: full extent)");
  donut_cmd->add_option("--near", donut_args.near_max, "Near bucket upper bound")
      ->capture_default_str();
  donut_cmd->add_option("--medium", donut_args.medium_max, "Medium bucket upper bound")
      ->capture_default_str();
  donut_cmd->add_flag("--self-loops", donut_args.self_loops, "Count self-loops");
  donut_cmd->add_option("--json", donut_args.json_out, "Write the aggregate JSON here");
  donut_cmd->add_option("--svg", donut_args.svg_out, "Write the SVG donut here");

  // serve ------------------------------------------------------------------
  ServeArgs serve_args;
  if (const char* env = std::getenv("DONUT_SSN_DATA_DIR")) serve_args.data_dir = env;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API and viewer");
  serve->add_option("--host", serve_args.host, "Bind address")->capture_default_str();
  serve->add_option("--port", serve_args.port, "Port (0 = any free port)")
      ->capture_default_str();
  serve->add_option("--data-dir", serve_args.data_dir,
                    "Write-through directory (default $DONUT_SSN_DATA_DIR)");
  serve->add_option("--assets", serve_args.assets, "Built viewer assets served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*gen_poisson) {
      if (!poisson.valid()) throw UsageError("invalid Poisson network parameters");
      write_network(donut::generate_poisson(poisson), poisson_out);
    } else if (*gen_clustered) {
      if (!centers_text.empty()) clustered.centers = parse_centers(centers_text);
      if (!clustered.valid()) throw UsageError("invalid clustered network parameters");
      write_network(donut::generate_clustered(clustered), clustered_out);
    } else if (*donut_cmd) {
      return run_donut(donut_args);
    } else if (*serve) {
      return run_serve(serve_args);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
