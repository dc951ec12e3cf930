#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "neupath/graph.hpp"
#include "neupath/graph_io.hpp"
#include "neupath/metapath.hpp"
#include "neupath/synth.hpp"
#include "testutil.hpp"

using namespace neupath;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("neupath_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

const char* kAcmSchema = R"({"node_types":["A","P"],
  "edge_types":[{"name":"AP","a":"A","b":"P"}]})";

}  // namespace

TEST_CASE("schema validation") {
    CHECK_THROWS_AS(NetworkSchema({"A"}, {}), DataError);  // HIN condition
    CHECK_NOTHROW(NetworkSchema({"A", "P"}, {}));
    CHECK_NOTHROW(NetworkSchema({"A"}, {{"r0", 0, 0}, {"r1", 0, 0}}));
    CHECK_THROWS_AS(NetworkSchema({"A", "A"}, {{"AP", 0, 1}}), DataError);
    CHECK_THROWS_AS(NetworkSchema({"A", "P"}, {{"AP", 0, 5}}), DataError);

    NetworkSchema s = testutil::apc_schema();
    CHECK(s.node_type_id("P") == 1);
    CHECK(s.edge_type_id("PC") == 1);
    CHECK_THROWS_AS(s.node_type_id("Z"), DataError);
    CHECK(s.edge_types_between(0, 1) == std::vector<EdgeTypeId>{0});
    CHECK(s.edge_types_between(1, 0) == std::vector<EdgeTypeId>{0});
    CHECK(s.edge_types_between(0, 2).empty());
}

TEST_CASE("graph build invariants") {
    HinGraph g = testutil::make_g0();
    CHECK(g.num_nodes() == 4);
    CHECK(g.num_edges() == 3);
    CHECK(g.node_type(0) == 0);
    CHECK(g.node_type(2) == 1);
    CHECK(g.nodes_of_type(0) == std::vector<NodeId>{0, 1});

    // undirected mirror: every edge appears in both lists
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        for (const Neighbor& nb : g.neighbors(v)) {
            bool mirrored = false;
            for (const Neighbor& back : g.neighbors(nb.node))
                if (back.node == v && back.edge_type == nb.edge_type) mirrored = true;
            CHECK(mirrored);
            // endpoint types match the edge type schema
            CHECK(g.schema().edge_type_connects(nb.edge_type, g.node_type(v), g.node_type(nb.node)));
        }
        auto nbrs = g.neighbors(v);
        for (size_t i = 1; i < nbrs.size(); ++i)
            CHECK(std::tie(nbrs[i - 1].node, nbrs[i - 1].edge_type) <
                  std::tie(nbrs[i].node, nbrs[i].edge_type));
    }
}

TEST_CASE("graph build rejects bad edges") {
    NetworkSchema schema({"A", "P"}, {{"AP", 0, 1}});
    CHECK_THROWS_AS(HinGraph::build(schema, {0, 1}, {{0, 0, 0}}), DataError);      // self loop
    CHECK_THROWS_AS(HinGraph::build(schema, {0, 0}, {{0, 1, 0}}), DataError);      // A-A via AP
    CHECK_THROWS_AS(HinGraph::build(schema, {0, 1}, {{0, 5, 0}}), DataError);      // out of range
    CHECK_THROWS_AS(HinGraph::build(schema, {0, 1}, {{0, 1, 0}, {1, 0, 0}}), DataError);  // dup
}

TEST_CASE("metapath parse and symmetry") {
    NetworkSchema acm({"A", "P"}, {{"AP", 0, 1}});
    MetaPath apa = parse_metapath("A-P-A", acm);
    CHECK(apa.is_symmetric());
    CHECK(apa.node_types() == std::vector<NodeTypeId>{0, 1, 0});
    CHECK(apa.edge_types() == std::vector<EdgeTypeId>{0, 0});

    MetaPath ap = parse_metapath("A-P", acm);
    CHECK_FALSE(ap.is_symmetric());

    MetaPath mamam = parse_metapath("M-A-M-A-M", testutil::imdb_schema());
    CHECK(mamam.is_symmetric());
    CHECK(mamam.node_types().size() == 5);

    MetaPath expl = parse_metapath("A[AP]P[AP]A", acm);
    CHECK(expl.is_symmetric());

    CHECK_THROWS_AS(parse_metapath("A-Z-A", acm), DataError);   // unknown type
    CHECK_THROWS_AS(parse_metapath("A-A", acm), DataError);     // no connecting edge type
    CHECK_THROWS_AS(parse_metapath("A[ZZ]P", acm), DataError);  // unknown edge type
    CHECK_THROWS_AS(parse_metapath("A[AP", acm), DataError);    // unterminated

    // ambiguity: two edge types between A and P requires explicit syntax
    NetworkSchema multi({"A", "P"}, {{"writes", 0, 1}, {"reviews", 0, 1}});
    CHECK_THROWS_AS(parse_metapath("A-P-A", multi), DataError);
    MetaPath w = parse_metapath("A[writes]P[writes]A", multi);
    CHECK(w.is_symmetric());
    MetaPath mixed = parse_metapath("A[writes]P[reviews]A", multi);
    CHECK_FALSE(mixed.is_symmetric());  // edge palindrome broken
}

TEST_CASE("load_graph happy path and id map") {
    auto dir = temp_dir("load");
    write_file(dir / "schema.json", kAcmSchema);
    write_file(dir / "nodes.tsv", "# comment line\na1\tA\na2\tA\np1\tP\np2\tP\n");
    write_file(dir / "edges.tsv", "a1\tp1\tAP\na1\tp2\tAP\na2\tp1\tAP\n");

    auto loaded = load_graph((dir / "nodes.tsv").string(), (dir / "edges.tsv").string(),
                             (dir / "schema.json").string());
    CHECK(loaded.graph.num_nodes() == 4);
    CHECK(loaded.graph.num_edges() == 3);
    CHECK(loaded.original_ids == std::vector<std::string>{"a1", "a2", "p1", "p2"});

    write_id_map(loaded.original_ids, (dir / "id_map.tsv").string());
    std::ifstream in(dir / "id_map.tsv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "0\ta1");
}

TEST_CASE("load_graph error reporting carries file and line") {
    auto dir = temp_dir("load_err");
    write_file(dir / "schema.json", kAcmSchema);

    SECTION("dangling endpoint") {
        write_file(dir / "nodes.tsv", "a1\tA\np1\tP\n");
        write_file(dir / "edges.tsv", "a1\tp1\tAP\na1\t99\tAP\n");
        try {
            load_graph((dir / "nodes.tsv").string(), (dir / "edges.tsv").string(),
                       (dir / "schema.json").string());
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("edges.tsv:2") != std::string::npos);
            CHECK(std::string(e.what()).find("99") != std::string::npos);
        }
    }
    SECTION("duplicate node id") {
        write_file(dir / "nodes.tsv", "a1\tA\na1\tA\n");
        write_file(dir / "edges.tsv", "");
        try {
            load_graph((dir / "nodes.tsv").string(), (dir / "edges.tsv").string(),
                       (dir / "schema.json").string());
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("nodes.tsv:2") != std::string::npos);
        }
    }
    SECTION("endpoint type mismatch") {
        write_file(dir / "nodes.tsv", "a1\tA\na2\tA\n");
        write_file(dir / "edges.tsv", "a1\ta2\tAP\n");
        CHECK_THROWS_AS(load_graph((dir / "nodes.tsv").string(), (dir / "edges.tsv").string(),
                                   (dir / "schema.json").string()),
                        DataError);
    }
    SECTION("empty edges file gives isolated nodes") {
        write_file(dir / "nodes.tsv", "a1\tA\np1\tP\n");
        write_file(dir / "edges.tsv", "");
        auto loaded = load_graph((dir / "nodes.tsv").string(), (dir / "edges.tsv").string(),
                                 (dir / "schema.json").string());
        CHECK(loaded.graph.num_nodes() == 2);
        CHECK(loaded.graph.num_edges() == 0);
    }
}

TEST_CASE("ACM-scale load keeps declared counts") {
    auto dir = temp_dir("acm_scale");
    write_file(dir / "schema.json", kAcmSchema);
    const int n_authors = 17431, n_papers = 12499, n_edges = 37055;
    std::string nodes, edges;
    for (int i = 0; i < n_authors; ++i) nodes += "a" + std::to_string(i) + "\tA\n";
    for (int i = 0; i < n_papers; ++i) nodes += "p" + std::to_string(i) + "\tP\n";
    Rng rng(5);
    std::set<std::pair<int, int>> used;
    while (static_cast<int>(used.size()) < n_edges) {
        int a = static_cast<int>(rng.below(n_authors));
        int p = static_cast<int>(rng.below(n_papers));
        if (used.insert({a, p}).second)
            edges += "a" + std::to_string(a) + "\tp" + std::to_string(p) + "\tAP\n";
    }
    write_file(dir / "nodes.tsv", nodes);
    write_file(dir / "edges.tsv", edges);
    auto loaded = load_graph((dir / "nodes.tsv").string(), (dir / "edges.tsv").string(),
                             (dir / "schema.json").string());
    CHECK(loaded.graph.num_nodes() == n_authors + n_papers);
    CHECK(loaded.graph.num_edges() == n_edges);
    CHECK(loaded.graph.nodes_of_type(0).size() == n_authors);
}

TEST_CASE("save/load round trip reproduces node and edge multisets") {
    Rng rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        NetworkSchema schema = testutil::random_schema(rng);
        HinGraph g = testutil::random_hin(rng, schema);
        auto dir = temp_dir("roundtrip" + std::to_string(trial));
        save_graph(g, {}, dir.string());
        auto loaded = load_graph((dir / "nodes.tsv").string(), (dir / "edges.tsv").string(),
                                 (dir / "schema.json").string());
        REQUIRE(loaded.graph.num_nodes() == g.num_nodes());
        REQUIRE(loaded.graph.num_edges() == g.num_edges());

        auto key = [](const HinGraph& h) {
            std::multiset<std::tuple<std::string, std::string, std::string>> edges;
            for (const Edge& e : h.edge_list())
                edges.insert({std::to_string(e.src), std::to_string(e.dst),
                              h.schema().edge_type(e.type).name});
            return edges;
        };
        // dense ids survive a dense-id save: the multisets must be equal
        CHECK(key(loaded.graph) == key(g));
    }
}

TEST_CASE("synth_graph determinism and feasibility") {
    NetworkSchema schema = testutil::apc_schema();
    HinGraph g1 = synth_graph(schema, {10, 20, 5}, {30, 20}, 7);
    HinGraph g2 = synth_graph(schema, {10, 20, 5}, {30, 20}, 7);
    auto edges1 = g1.edge_list();
    auto edges2 = g2.edge_list();
    REQUIRE(edges1.size() == edges2.size());
    for (size_t i = 0; i < edges1.size(); ++i) {
        CHECK(edges1[i].src == edges2[i].src);
        CHECK(edges1[i].dst == edges2[i].dst);
        CHECK(edges1[i].type == edges2[i].type);
    }
    CHECK(g1.num_edges() == 50);

    HinGraph g3 = synth_graph(schema, {10, 20, 5}, {30, 20}, 8);
    CHECK(g3.edge_list() != std::vector<Edge>{});  // different seed builds fine

    HinGraph empty = synth_graph(schema, {4, 4, 2}, {0, 0}, 1);
    CHECK(empty.num_edges() == 0);

    CHECK_THROWS_AS(synth_graph(schema, {2, 2, 1}, {5, 0}, 1), DataError);  // > 2*2 pairs
}

TEST_CASE("synth_graph dense sampling covers the pair space") {
    NetworkSchema schema({"A", "P"}, {{"AP", 0, 1}});
    HinGraph g = synth_graph(schema, {4, 4}, {16, }, 3);
    CHECK(g.num_edges() == 16);  // complete bipartite
}

inline bool operator==(const Edge& a, const Edge& b) {
    return a.src == b.src && a.dst == b.dst && a.type == b.type;
}
