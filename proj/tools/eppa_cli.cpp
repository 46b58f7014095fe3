// Command-line driver: builds witnesses from structure documents, extends
// partial automorphisms, runs the verification sweeps, and renders reports.
//
// Exit codes: 0 built/verified-pass, 1 verified-fail (a counterexample was
// found and reported), 2 input error, 3 resource limit.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "eppa/core.hpp"
#include "eppa/interchange.hpp"
#include "eppa/metric.hpp"
#include "eppa/tree_pipeline.hpp"
#include "eppa/verifier.hpp"
#include "eppa/witness.hpp"
#include "eppa/witness_faithful.hpp"
#include "eppa/witness_functions.hpp"
#include "eppa/witness_graph.hpp"
#include "eppa/witness_relational.hpp"
#include "eppa/witness_unwind.hpp"

using namespace eppa;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr std::uint64_t kDefaultSeed = 1729;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot read file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write file: " + path);
  out << text;
  if (!out) throw input_error("write failed: " + path);
}

// Resource caps: defaults, overridden by EPPA_CAPS="key=value,...".
Caps caps_from_env() {
  Caps c = default_caps();
  const char* e = std::getenv("EPPA_CAPS");
  if (!e) return c;
  std::istringstream in(e);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw input_error("EPPA_CAPS: expected key=value, got '" + item + "'");
    std::string key = item.substr(0, eq);
    long long val = 0;
    try {
      val = std::stoll(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw input_error("EPPA_CAPS: bad number in '" + item + "'");
    }
    if (val <= 0) throw input_error("EPPA_CAPS: " + key + " must be positive");
    if (key == "search_nodes")
      c.search_nodes = val;
    else if (key == "max_items")
      c.max_items = val;
    else if (key == "max_witness_vertices")
      c.max_witness_vertices = val;
    else if (key == "max_subset_bits")
      c.max_subset_bits = val;
    else
      throw input_error("EPPA_CAPS: unknown cap '" + key + "'");
  }
  return c;
}

Structure load_structure(const std::string& path) {
  try {
    return parse_structure(read_file(path));
  } catch (const input_error& e) {
    throw input_error(path + ": " + e.what());
  }
}

Morphism load_morphism(const std::string& path, const Language& L) {
  try {
    return parse_morphism(read_file(path), L);
  } catch (const input_error& e) {
    throw input_error(path + ": " + e.what());
  }
}

// The identity embedding of A into a structure that contains A's vertices.
Morphism inclusion_morphism(const Structure& A) {
  Morphism m;
  m.perm = identity_perm(A.lang.nrel(), A.lang.nfun());
  for (Vertex v : A.verts) m.vmap[v] = v;
  return m;
}

bool is_plain_graph(const Structure& S) {
  return S.lang.nfun() == 0 && S.lang.nrel() == 1 && S.lang.rel_arity[0] == 2 &&
         S.lang.group.size() == 1 && is_symmetric_irreflexive(S, 0);
}

// Wraps a hand-supplied carrier B0 as a witness bundle for A: the embedding
// is the inclusion (A's vertex ids inside B0), the extension operator is the
// exhaustive backtracking search.
Witness backtracking_bundle(const Structure& A, const Structure& B0, const Caps& caps) {
  if (A.lang != B0.lang) throw input_error("base and carrier use different languages");
  Witness w;
  w.base = A;
  w.witness = B0;
  w.psi = inclusion_morphism(A);
  if (auto chk = check_morphism(w.psi, A, B0, MorphKind::embedding, caps); !chk.ok)
    throw input_error("the carrier does not contain the base on the same vertex ids: " +
                      chk.violation);
  Structure B0c = B0;
  Caps caps_c = caps;
  w.extend = [B0c, caps_c](const Morphism& pa) {
    auto theta = extend_to_automorphism(B0c, pa, caps_c);
    if (!theta)
      throw input_error("no automorphism of the carrier extends the map (exhaustive search)");
    return *theta;
  };
  return w;
}

// Default carrier bundle for the layered constructions, chosen by language
// shape: functions -> function witness, plain graph -> graph witness,
// anything else -> relational witness.
Witness default_carrier(const Structure& A, const Caps& caps) {
  if (A.lang.nfun() > 0) return as_witness(build_function_witness(A, caps));
  if (is_plain_graph(A)) return as_witness(build_graph_witness(A));
  return as_witness(build_relational_witness(A, caps));
}

struct BuiltWitness {
  Witness w;
  std::optional<Morphism> projection;  // unwind only: witness vertex -> carrier vertex
  std::string note;                    // extra summary text
};

int edge_relation_index(const std::string& name, const Language& L) {
  if (name.empty()) return -1;
  int r = L.rel_index(name);
  if (r < 0) throw input_error("unknown relation '" + name + "' for --edge-relation");
  return r;
}

// Central construction dispatch shared by `build` and the rebuild paths of
// `extend` and `verify`.
BuiltWitness build_bundle(const std::string& method, const Structure& A,
                          const std::optional<Structure>& base, int n,
                          const std::string& edge_relation, const Caps& caps) {
  auto no_base = [&](const char* m) {
    if (base) throw input_error(std::string("--base is not accepted by method ") + m);
  };
  auto no_n = [&](const char* m) {
    if (n > 0) throw input_error(std::string("--n is not accepted by method ") + m);
  };
  auto no_edge = [&](const char* m) {
    if (!edge_relation.empty())
      throw input_error(std::string("--edge-relation is not accepted by method ") + m);
  };
  BuiltWitness out;
  if (method == "graph") {
    no_base("graph"), no_n("graph"), no_edge("graph");
    out.w = as_witness(build_graph_witness(A));
  } else if (method == "relational") {
    no_base("relational"), no_n("relational"), no_edge("relational");
    out.w = as_witness(build_relational_witness(A, caps));
  } else if (method == "functions") {
    no_base("functions"), no_n("functions"), no_edge("functions");
    out.w = as_witness(build_function_witness(A, caps));
  } else if (method == "faithful") {
    no_n("faithful"), no_edge("faithful");
    Witness b0 = base ? backtracking_bundle(A, *base, caps) : default_carrier(A, caps);
    out.w = as_witness(build_faithful_witness(A, b0, caps));
  } else if (method == "unwind") {
    no_n("unwind");
    if (!base) throw input_error("method unwind needs --base (the carrier with the cycles)");
    Witness b0 = backtracking_bundle(A, *base, caps);
    int e_rel = edge_relation_index(edge_relation, base->lang);
    UnwindWitness uw = build_unwound_witness(A, b0, e_rel, caps);
    Morphism proj;
    proj.perm = identity_perm(A.lang.nrel(), A.lang.nfun());
    for (size_t i = 0; i < uw.witness.verts.size(); ++i)
      proj.vmap[uw.witness.verts[i]] = uw.projection[i];
    out.projection = std::move(proj);
    out.w = as_witness(std::move(uw));
  } else if (method == "pipeline") {
    no_edge("pipeline");
    Witness b0 = base ? backtracking_bundle(A, *base, caps) : default_carrier(A, caps);
    PipelineWitness pw = build_pipeline_witness(A, b0, n > 0 ? n : 2, caps);
    out.note = " (" + std::to_string(pw.rounds) + " unwinding rounds)";
    out.w = std::move(pw.result);
  } else if (method == "metric") {
    no_base("metric"), no_edge("metric");
    EdgeLabelledGraph G = to_edge_labelled_graph(A);
    MetricWitness mw = build_metric_witness(G, n > 0 ? n : 3, caps);
    out.note = " (route: " + mw.route + ")";
    out.w = std::move(mw.result);
  } else {
    throw input_error("unknown method '" + method + "'");
  }
  return out;
}

json caps_json(const Caps& c) {
  return json{{"search_nodes", c.search_nodes},
              {"max_items", c.max_items},
              {"max_witness_vertices", c.max_witness_vertices},
              {"max_subset_bits", c.max_subset_bits}};
}

json report_json(const VerifyReport& rep, const Language& L, std::uint64_t seed,
                 const Caps& caps, const json& files) {
  json j;
  j["tool"] = "eppa_cli";
  j["version"] = kVersion;
  j["check"] = rep.kind;
  j["pass"] = rep.pass;
  j["detail"] = rep.detail;
  j["instance"] = json::object();
  for (const auto& [k, v] : rep.instance) j["instance"][k] = v;
  j["stats"] = {{"checked", rep.checked}, {"sampled", rep.sampled}};
  j["seed"] = seed;
  j["caps"] = caps_json(caps);
  j["files"] = files;
  if (!rep.counter_morphisms.empty() || rep.counter_subset) {
    json c = json::object();
    if (!rep.counter_morphisms.empty()) {
      c["morphisms"] = json::array();
      for (const Morphism& m : rep.counter_morphisms)
        c["morphisms"].push_back(serialize_morphism(m, L));
    }
    if (rep.counter_subset) {
      c["subset"] = json::array();
      for (Vertex v : *rep.counter_subset) c["subset"].push_back(v);
    }
    j["counterexample"] = std::move(c);
  }
  return j;
}

void print_report(const VerifyReport& rep, const Language& L) {
  std::cout << "check " << rep.kind << ": " << (rep.pass ? "PASS" : "FAIL") << " — " << rep.detail
            << "\n";
  std::cout << "  checked " << rep.checked << " instance(s)";
  if (rep.sampled) std::cout << ", " << rep.sampled << " sampled";
  std::cout << "\n";
  for (const auto& [k, v] : rep.instance) std::cout << "  " << k << ": " << v << "\n";
  for (const Morphism& m : rep.counter_morphisms) {
    std::cout << "  counterexample morphism:\n";
    std::istringstream lines(serialize_morphism(m, L));
    std::string line;
    while (std::getline(lines, line)) std::cout << "    " << line << "\n";
    if (m.vmap.empty() && m.perm.is_identity()) std::cout << "    (empty map)\n";
  }
  if (rep.counter_subset) {
    std::cout << "  counterexample subset:";
    for (Vertex v : *rep.counter_subset) std::cout << " " << v;
    std::cout << "\n";
  }
}

// A size-n set of pairwise distance-1 vertices, if any; the counterexample
// payload for the clique-freeness check.
std::optional<std::vector<Vertex>> find_unit_clique(const EdgeLabelledGraph& G, int n) {
  std::vector<Vertex> cur;
  std::function<bool(size_t)> rec = [&](size_t from) -> bool {
    if ((int)cur.size() == n) return true;
    for (size_t i = from; i < G.verts.size(); ++i) {
      Vertex v = G.verts[i];
      bool ok = true;
      for (Vertex u : cur)
        if (G.label(u, v) != 1) {
          ok = false;
          break;
        }
      if (!ok) continue;
      cur.push_back(v);
      if (rec(i + 1)) return true;
      cur.pop_back();
    }
    return false;
  };
  if (n >= 1 && rec(0)) return cur;
  return std::nullopt;
}

// Metric-space + clique-freeness check over a structure-encoded labelled
// graph, reported in the common sweep format.
VerifyReport verify_metric(const Structure& B, int clique_bound) {
  EdgeLabelledGraph G = to_edge_labelled_graph(B);
  VerifyReport rep;
  rep.kind = "metric";
  rep.instance["vertices"] = std::to_string(G.size());
  {
    std::string s;
    for (int d : G.s) s += (s.empty() ? "" : " ") + std::to_string(d);
    rep.instance["labels"] = "{" + s + "}";
  }
  long long n = (long long)G.size();
  rep.checked = n * (n - 1) / 2 + n * (n - 1) * (n - 2) / 6;
  CheckResult metric = check_metric_space(G);
  if (!metric.ok) {
    rep.pass = false;
    rep.detail = "the witness is not a metric space: " + metric.violation;
    return rep;
  }
  if (clique_bound > 0) {
    rep.instance["clique_bound"] = std::to_string(clique_bound);
    if (auto clique = find_unit_clique(G, clique_bound)) {
      rep.pass = false;
      rep.detail = "the witness carries " + std::to_string(clique_bound) +
                   " points pairwise at distance 1";
      rep.counter_subset = VertexSet(clique->begin(), clique->end());
      return rep;
    }
  }
  rep.pass = true;
  rep.detail = clique_bound > 0
                   ? "the witness is a metric space with no unit-distance clique of the bound"
                   : "the witness is a metric space";
  return rep;
}

// Membership of the witness in the class forbidding homomorphism-embeddings
// of the given structures, reported per forbidden structure.
VerifyReport verify_forbhe(const std::vector<Structure>& forbidden,
                           const std::vector<std::string>& names, const Structure& B,
                           const Caps& caps) {
  VerifyReport rep;
  rep.kind = "forbhe";
  rep.instance["witness_vertices"] = std::to_string(B.size());
  rep.instance["forbidden_structures"] = std::to_string(forbidden.size());
  rep.checked = (long long)forbidden.size();
  for (size_t i = 0; i < forbidden.size(); ++i) {
    if (!check_free_amalgamation_membership({forbidden[i]}, B, caps)) {
      rep.pass = false;
      rep.detail = "forbidden structure '" + names[i] +
                   "' admits a homomorphism-embedding into the witness";
      rep.instance["violating_structure"] = names[i];
      return rep;
    }
  }
  rep.pass = true;
  rep.detail = "no forbidden structure admits a homomorphism-embedding into the witness";
  return rep;
}

// Rebuilds the constructive bundle and insists it matches the files on disk,
// so the verified extension operator is the one belonging to the inputs.
Witness rebuilt_matching_bundle(const std::string& method, const Structure& A,
                                const std::optional<Structure>& base, int n,
                                const std::string& edge_relation, const Structure& B,
                                const Morphism& psi, const Caps& caps) {
  BuiltWitness built = build_bundle(method, A, base, n, edge_relation, caps);
  if (serialize_structure(built.w.witness) != serialize_structure(B))
    throw input_error("the witness file does not match the rebuilt '" + method +
                      "' construction; re-run build or drop --method for backtracking");
  if (!(built.w.psi == psi))
    throw input_error("the embedding file does not match the rebuilt '" + method +
                      "' construction; re-run build or drop --method for backtracking");
  return built.w;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EPPA witness construction and verification"};
  app.require_subcommand(1);

  // --- build ---------------------------------------------------------------
  auto* build = app.add_subcommand("build", "Construct a witness for a structure document");
  std::string b_method, b_input, b_base, b_out, b_embedding, b_projection, b_edge;
  int b_n = 0;
  build->add_option("--method", b_method, "graph|relational|functions|faithful|unwind|pipeline|metric")
      ->required()
      ->check(CLI::IsMember(
          {"graph", "relational", "functions", "faithful", "unwind", "pipeline", "metric"}));
  build->add_option("--input", b_input, "base structure document")->required();
  build->add_option("--base", b_base,
                    "carrier structure for faithful/unwind/pipeline (must contain the base on "
                    "the same vertex ids); built internally when omitted");
  build->add_option("--n", b_n, "pipeline: substructure size bound (default 2); metric: forbidden clique size (default 3)");
  build->add_option("--edge-relation", b_edge, "unwind: name of the shared edge relation");
  build->add_option("--out", b_out, "output structure document")->required();
  build->add_option("--emit-embedding", b_embedding, "write the base-into-witness embedding");
  build->add_option("--emit-projection", b_projection,
                    "unwind: write the witness-onto-carrier projection");

  // --- extend ----------------------------------------------------------------
  auto* extend = app.add_subcommand(
      "extend", "Extend a partial automorphism of the distinguished copy to the whole witness");
  std::string e_witness, e_embedding, e_pa, e_out, e_method, e_input, e_base, e_edge;
  int e_n = 0;
  extend->add_option("--witness", e_witness, "witness structure document")->required();
  extend->add_option("--embedding", e_embedding, "embedding document (omitted = identity)");
  extend->add_option("--pa", e_pa, "partial automorphism document")->required();
  extend->add_option("--out", e_out, "output morphism document")->required();
  extend->add_option("--method", e_method,
                     "rebuild this construction for the coherent extension operator "
                     "(needs --input; falls back to backtracking when omitted)");
  extend->add_option("--input", e_input, "base structure document for --method");
  extend->add_option("--base", e_base, "carrier document for --method faithful/unwind/pipeline");
  extend->add_option("--n", e_n, "parameter for --method pipeline/metric");
  extend->add_option("--edge-relation", e_edge, "edge relation name for --method unwind");

  // --- verify ----------------------------------------------------------------
  auto* verify = app.add_subcommand("verify", "Run a verification sweep and report the outcome");
  std::string v_check, v_input, v_witness, v_embedding, v_base, v_projection, v_method, v_edge;
  std::string v_json;
  std::vector<std::string> v_forbidden;
  int v_n = 0, v_cap = 12;
  std::uint64_t v_seed = kDefaultSeed;
  long long v_samples = 10000;
  bool v_serial = false;
  verify->add_option("--check", v_check, "eppa|coherence|faithful|unwind|size|metric|forbhe")
      ->required()
      ->check(CLI::IsMember({"eppa", "coherence", "faithful", "unwind", "size", "metric", "forbhe"}));
  verify->add_option("--input", v_input, "base structure document");
  verify->add_option("--witness", v_witness, "witness structure document")->required();
  verify->add_option("--embedding", v_embedding, "embedding document (omitted = identity)");
  verify->add_option("--base", v_base, "carrier document (unwind target; size: carrier below)");
  verify->add_option("--projection", v_projection, "unwind: witness-onto-carrier projection");
  verify->add_option("--method", v_method,
                     "eppa/coherence: verify the rebuilt construction's extension operator; "
                     "size: the construction kind to audit");
  verify->add_option("--n", v_n, "parameter for --method pipeline/metric and --check metric");
  verify->add_option("--edge-relation", v_edge, "edge relation name (unwind)");
  verify->add_option("--forbidden", v_forbidden, "forbhe: forbidden structure document(s)");
  verify->add_option("--json", v_json, "write the report as JSON");
  verify->add_option("--cap", v_cap, "unwind: exhaustive subset sweep up to this many vertices");
  verify->add_option("--seed", v_seed, "sampling seed");
  verify->add_option("--samples", v_samples, "unwind: sampled subsets beyond the cap");
  verify->add_flag("--serial", v_serial, "run the sweep single-threaded");

  // --- report ----------------------------------------------------------------
  auto* report = app.add_subcommand("report", "Pretty-print a JSON report");
  std::string r_json;
  report->add_option("--json", r_json, "report file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const Caps caps = caps_from_env();

    if (app.got_subcommand(build)) {
      Structure A = load_structure(b_input);
      std::optional<Structure> base;
      if (!b_base.empty()) base = load_structure(b_base);
      BuiltWitness built = build_bundle(b_method, A, base, b_n, b_edge, caps);
      write_file(b_out, serialize_structure(built.w.witness));
      if (!b_embedding.empty())
        write_file(b_embedding, serialize_morphism(built.w.psi, built.w.witness.lang));
      if (!b_projection.empty()) {
        if (!built.projection)
          throw input_error("--emit-projection applies to method unwind only");
        write_file(b_projection, serialize_morphism(*built.projection, built.w.witness.lang));
      }
      std::cout << "built " << b_method << " witness: " << built.w.witness.size()
                << " vertices over a base of " << A.size() << built.note << " -> " << b_out
                << "\n";
      return 0;
    }

    if (app.got_subcommand(extend)) {
      Structure B = load_structure(e_witness);
      Morphism pa = load_morphism(e_pa, B.lang);
      std::optional<Morphism> theta;
      if (!e_method.empty()) {
        if (e_input.empty()) throw input_error("--method needs --input");
        Structure A = load_structure(e_input);
        Morphism psi =
            e_embedding.empty() ? inclusion_morphism(A) : load_morphism(e_embedding, B.lang);
        std::optional<Structure> base;
        if (!e_base.empty()) base = load_structure(e_base);
        Witness w = rebuilt_matching_bundle(e_method, A, base, e_n, e_edge, B, psi, caps);
        theta = w.extend(pa);  // input_error on maps outside the witness's shape
      } else {
        theta = extend_to_automorphism(B, pa, caps);
      }
      if (!theta) {
        std::cout << "no automorphism of the witness extends the map (exhaustive search)\n";
        return 1;
      }
      write_file(e_out, serialize_morphism(*theta, B.lang));
      std::cout << "extended a map of " << pa.vmap.size() << " vertex(es) to an automorphism of "
                << B.size() << " -> " << e_out << "\n";
      return 0;
    }

    if (app.got_subcommand(verify)) {
      Structure B = load_structure(v_witness);
      json files = json::object();
      files["witness"] = v_witness;
      auto need_input = [&]() -> Structure {
        if (v_input.empty()) throw input_error("--check " + v_check + " needs --input");
        files["input"] = v_input;
        return load_structure(v_input);
      };

      VerifyReport rep;
      if (v_check == "eppa" || v_check == "coherence" || v_check == "faithful") {
        Structure A = need_input();
        Morphism psi =
            v_embedding.empty() ? inclusion_morphism(A) : load_morphism(v_embedding, B.lang);
        if (!v_embedding.empty()) files["embedding"] = v_embedding;
        std::optional<ExtensionOperator> op;
        if (!v_method.empty() && v_check != "faithful") {
          std::optional<Structure> base;
          if (!v_base.empty()) base = load_structure(v_base);
          op = rebuilt_matching_bundle(v_method, A, base, v_n, v_edge, B, psi, caps).extend;
        }
        if (v_check == "eppa") {
          rep = verify_eppa_witness(A, B, psi, op, caps, !v_serial);
        } else if (v_check == "coherence") {
          if (!op) {
            Structure Bc = B;
            Caps caps_c = caps;
            op = [Bc, caps_c](const Morphism& pa) {
              auto theta = extend_to_automorphism(Bc, pa, caps_c);
              if (!theta)
                throw input_error("no automorphism extends the map (exhaustive search)");
              return *theta;
            };
          }
          rep = verify_coherence(A, B, psi, *op, caps, !v_serial);
        } else {
          rep = verify_faithfulness(A, B, psi, caps, !v_serial);
        }
      } else if (v_check == "unwind") {
        if (v_base.empty()) throw input_error("--check unwind needs --base (the carrier)");
        if (v_projection.empty())
          throw input_error("--check unwind needs --projection (witness onto carrier)");
        Structure B0 = load_structure(v_base);
        Morphism f = load_morphism(v_projection, B.lang);
        files["base"] = v_base;
        files["projection"] = v_projection;
        if (!f.perm.is_identity())
          throw input_error("the projection must not permute symbols");
        int e_rel = edge_relation_index(v_edge, B0.lang);
        rep = verify_unwind_property(B, B0, f, v_cap, v_seed, e_rel, v_samples, caps, !v_serial);
      } else if (v_check == "size") {
        if (v_method.empty())
          throw input_error("--check size needs --method (the construction kind)");
        Structure A = need_input();
        std::optional<Structure> below;
        if (!v_base.empty()) {
          below = load_structure(v_base);
          files["base"] = v_base;
        }
        int e_rel = below ? edge_relation_index(v_edge, below->lang) : -1;
        rep = audit_witness_size(v_method, A, B, below, e_rel, caps);
      } else if (v_check == "metric") {
        rep = verify_metric(B, v_n);
      } else {  // forbhe
        if (v_forbidden.empty())
          throw input_error("--check forbhe needs at least one --forbidden document");
        std::vector<Structure> forb;
        for (const std::string& p : v_forbidden) forb.push_back(load_structure(p));
        files["forbidden"] = v_forbidden;
        rep = verify_forbhe(forb, v_forbidden, B, caps);
      }

      print_report(rep, B.lang);
      if (!v_json.empty()) {
        write_file(v_json, report_json(rep, B.lang, v_seed, caps, files).dump(2) + "\n");
        std::cout << "report written to " << v_json << "\n";
      }
      return rep.pass ? 0 : 1;
    }

    // report
    json j = json::parse(read_file(r_json));
    std::cout << j.value("tool", "?") << " " << j.value("version", "?") << " report\n";
    std::cout << "check:   " << j.value("check", "?") << "\n";
    std::cout << "result:  " << (j.value("pass", false) ? "PASS" : "FAIL") << "\n";
    std::cout << "detail:  " << j.value("detail", "") << "\n";
    if (j.contains("instance"))
      for (auto& [k, v] : j["instance"].items())
        std::cout << "  " << k << ": " << v.get<std::string>() << "\n";
    if (j.contains("stats"))
      std::cout << "stats:   checked=" << j["stats"].value("checked", 0)
                << " sampled=" << j["stats"].value("sampled", 0) << "\n";
    std::cout << "seed:    " << j.value("seed", 0ull) << "\n";
    if (j.contains("counterexample")) {
      const json& c = j["counterexample"];
      if (c.contains("morphisms"))
        for (const auto& m : c["morphisms"]) {
          std::cout << "counterexample morphism:\n";
          std::istringstream lines(m.get<std::string>());
          std::string line;
          while (std::getline(lines, line)) std::cout << "    " << line << "\n";
        }
      if (c.contains("subset")) {
        std::cout << "counterexample subset:";
        for (const auto& v : c["subset"]) std::cout << " " << v.get<long long>();
        std::cout << "\n";
      }
    }
    return 0;
  } catch (const resource_limit_error& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 3;
  } catch (const input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  }
}
