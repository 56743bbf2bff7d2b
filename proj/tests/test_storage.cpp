#include "doctest.h"

#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "skelforge/error.hpp"
#include "skelforge/image_io.hpp"
#include "skelforge/skeleton_graph.hpp"
#include "skelforge/storage.hpp"
#include "tmpdir.hpp"

using namespace skelforge;
namespace fs = std::filesystem;
using fixtures::random_record;

namespace {

GrayImage read_pgm(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::string magic;
    int w = 0, h = 0, maxv = 0;
    in >> magic >> w >> h >> maxv;
    in.get();
    GrayImage g{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w * h))};
    in.read(reinterpret_cast<char*>(g.pixels.data()), static_cast<std::streamsize>(g.pixels.size()));
    return g;
}

}  // namespace

TEST_CASE("GIF frames decode to the values Pillow encoded") {
    for (const char* name : {"plain", "interlaced"}) {
        const fs::path dir = SKELFORGE_TEST_DATA;
        const GrayImage want = read_pgm(dir / (std::string(name) + ".pgm"));
        const auto bytes = read_bytes(dir / (std::string(name) + ".gif"));
        const GrayImage got = decode_image(bytes);
        CHECK(got.width == want.width);
        CHECK(got.height == want.height);
        CHECK(got.pixels == want.pixels);
    }
    // the interlaced fixture really is interlaced
    const auto bytes = read_bytes(fs::path(SKELFORGE_TEST_DATA) / "interlaced.gif");
    const std::size_t palette = 3u << ((bytes[10] & 7) + 1);
    CHECK(bytes[13 + palette] == 0x2c);
    CHECK((bytes[13 + palette + 9] & 0x40) != 0);
}

TEST_CASE("1x1 GIF with a transparent pixel") {
    const std::vector<std::uint8_t> gif = {'G', 'I', 'F', '8', '9', 'a', 1, 0, 1, 0, 0x80, 0, 0, 0xff, 0xff, 0xff, 0, 0, 0,
                                           0x21, 0xf9, 4, 1, 0, 0, 0, 0, 0x2c, 0, 0, 0, 0, 1, 0, 1, 0, 0, 2, 2, 0x44, 1, 0, 0x3b};
    const GrayImage g = decode_gif(gif);
    CHECK(g.width == 1);
    CHECK(g.pixels == std::vector<std::uint8_t>{0});
}

TEST_CASE("PNG round trip and decode errors") {
    std::mt19937 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        GrayImage g{1 + static_cast<int>(rng() % 40), 1 + static_cast<int>(rng() % 40), {}};
        for (int i = 0; i < g.width * g.height; ++i) g.pixels.push_back(static_cast<std::uint8_t>(rng()));
        CHECK(decode_image(encode_png(g)).pixels == g.pixels);
    }
    RgbImage c{2, 1, {255, 0, 0, 10, 10, 10}};
    const GrayImage lum = decode_png(encode_png(c));
    CHECK(lum.pixels == std::vector<std::uint8_t>{76, 10});
    const std::vector<std::uint8_t> junk = {1, 2, 3, 4};
    CHECK_THROWS_AS(decode_image(junk), Error);
    std::vector<std::uint8_t> truncated = encode_png(GrayImage{8, 8, std::vector<std::uint8_t>(64, 9)});
    truncated.resize(truncated.size() / 2);
    CHECK_THROWS_AS(decode_image(truncated), Error);
}

TEST_CASE("masks binarize at 128 and store as 0/255") {
    GrayImage g{4, 1, {0, 127, 128, 255}};
    const BinaryMask m = binarize(g);
    CHECK_FALSE(m.at(1, 0));
    CHECK(m.at(2, 0));
    TempDir tmp;
    write_mask(tmp.path / "m.png", m);
    CHECK(read_mask(tmp.path / "m.png") == m);
    CHECK(read_image(tmp.path / "m.png").pixels == std::vector<std::uint8_t>{0, 0, 255, 255});
}

TEST_CASE("canonical JSON") {
    const nlohmann::json doc = {{"b", 1.5}, {"a", {{"z", nullptr}, {"y", {1, 2, 3}}}}, {"c", "x"}};
    const std::string text = canonical_json(doc);
    CHECK(text.find("\"a\"") < text.find("\"b\""));
    CHECK(text.find("1.500000") != std::string::npos);
    CHECK(text.find("[1, 2, 3]") != std::string::npos);
    CHECK(canonical_json(nlohmann::json::parse(text)) == text);
}

TEST_CASE("class labels drop trailing numbering") {
    CHECK(class_label("bird-03") == "bird");
    CHECK(class_label("camel_12") == "camel");
    CHECK(class_label("device0-1") == "device0");
    CHECK(class_label("horse") == "horse");
}

TEST_CASE("datasets load in name order and report bad files") {
    TempDir tmp;
    write_mask(tmp.path / "b-2.png", fixtures::disc(3));
    write_mask(tmp.path / "a-1.png", fixtures::rect(4, 2));
    fs::copy_file(fs::path(SKELFORGE_TEST_DATA) / "plain.gif", tmp.path / "c-1.gif");
    std::ofstream(tmp.path / "bad-1.png") << "not an image";
    std::ofstream(tmp.path / "notes.txt") << "ignored";
    const Dataset ds = load_dataset(tmp.path);
    REQUIRE(ds.items.size() == 3);
    CHECK(ds.items[0].id == "a-1");
    CHECK(ds.items[0].label == "a");
    CHECK(ds.items[1].mask == fixtures::disc(3));
    CHECK(ds.items[2].id == "c-1");
    REQUIRE(ds.errors.size() == 1);
    CHECK(ds.errors[0].id == "bad-1");
    CHECK_THROWS_AS(load_dataset(tmp.path / "missing"), Error);

    fs::create_directories(tmp.path / "pairs" / "masks");
    fs::create_directories(tmp.path / "pairs" / "images");
    write_mask(tmp.path / "pairs" / "masks" / "x1.png", fixtures::disc(3));
    write_mask(tmp.path / "pairs" / "images" / "x1.png", fixtures::disc(3));
    const Dataset pairs = load_dataset(tmp.path / "pairs", DatasetKind::ImageMask);
    REQUIRE(pairs.items.size() == 1);
    CHECK(pairs.items[0].image.has_value());
}

TEST_CASE("GT export/import is the identity on 100 random records") {
    std::mt19937 rng(12);
    TempDir tmp;
    for (int trial = 0; trial < 100; ++trial) {
        const GTRecord r = random_record(rng);
        const fs::path dir = tmp.path / std::to_string(trial);
        const fs::path manifest = export_gt(r, dir);
        CHECK(manifest == dir / "gt.json");
        for (const char* f : {"skeleton.png", "shape.png", "boundary.png", "thumb.png", "thumb_skeleton.png", "gt.json"}) {
            CHECK(fs::exists(dir / f));
        }
        CHECK(fs::exists(dir / "object.png") == r.object.has_value());
        const GTRecord back = import_gt(dir);
        REQUIRE(back == r);
        // second export is byte-identical
        const std::string first = std::string(reinterpret_cast<const char*>(read_bytes(manifest).data()), read_bytes(manifest).size());
        export_gt(back, dir);
        const auto again = read_bytes(manifest);
        CHECK(std::string(again.begin(), again.end()) == first);
    }
}

TEST_CASE("manifest layout") {
    std::mt19937 rng(13);
    TempDir tmp;
    const GTRecord r = random_record(rng);
    export_gt(r, tmp.path);
    const auto bytes = read_bytes(tmp.path / "gt.json");
    const auto doc = nlohmann::json::parse(bytes.begin(), bytes.end());
    CHECK(doc["format_version"] == kFormatVersion);
    CHECK(doc.contains("coordinate_system"));
    CHECK(doc["skeleton"]["endpoints"].size() == r.endpoints.size());
    CHECK(doc["provenance"]["tool_version"] == kToolVersion);
}

TEST_CASE("validation and import errors") {
    std::mt19937 rng(14);
    TempDir tmp;
    GTRecord r = random_record(rng);
    GTRecord bad = r;
    bad.endpoints.push_back({0, 0});
    CHECK_THROWS_AS(validate(bad), Error);
    bad = r;
    bad.skeleton.set(0, 0);
    CHECK_THROWS_AS(export_gt(bad, tmp.path / "bad"), Error);
    CHECK_FALSE(fs::exists(tmp.path / "bad" / "gt.json"));

    export_gt(r, tmp.path / "ok");
    auto bytes = read_bytes(tmp.path / "ok" / "gt.json");
    auto doc = nlohmann::json::parse(bytes.begin(), bytes.end());
    doc["format_version"] = 99;
    write_file_atomic(tmp.path / "ok" / "gt.json", doc.dump());
    try {
        import_gt(tmp.path / "ok");
        FAIL("expected VersionMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::VersionMismatch);
    }
    CHECK_THROWS_AS(import_gt(tmp.path / "nothing"), Error);
}

TEST_CASE("ladder files round trip") {
    std::mt19937 rng(15);
    TempDir tmp;
    const BinaryMask shape = fixtures::random_blob(rng, 48);
    const CandidateLadder ladder = build_ladder(shape, 4, 10);
    save_ladder(ladder, tmp.path / "ladder.json");
    const CandidateLadder back = load_ladder(tmp.path / "ladder.json");
    REQUIRE(back.steps.size() == ladder.steps.size());
    CHECK(back.dce_k == ladder.dce_k);
    for (std::size_t i = 0; i < back.steps.size(); ++i) {
        CHECK(back.steps[i] == ladder.steps[i]);
        CHECK(back.steps[i].radii == ladder.steps[i].radii);
    }
    try {
        load_ladder(tmp.path / "none.json");
        FAIL("expected MissingLadder");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingLadder);
    }
}
