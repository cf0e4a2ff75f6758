#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "surgenet/dataset.hpp"
#include "surgenet/oracle.hpp"

namespace surgenet {
namespace {

namespace fs = std::filesystem;

class TrackFiles : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               (std::string("surgenet_ds_") +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path write_text(const std::string& name, const std::string& text) {
        const auto p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    std::string read_text(const fs::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    TrackValidationError load_error(const std::string& text) {
        const auto p = write_text("bad.csv", text);
        try {
            load_track_csv(p);
        } catch (const TrackValidationError& e) {
            return e;
        }
        ADD_FAILURE() << "expected TrackValidationError";
        return TrackValidationError(TrackErrorKind::io, "none");
    }

    fs::path dir_;
};

StormTrack sample_track(std::uint64_t seed = 11) {
    Rng rng(seed);
    auto t = generate_track(rng, OracleParams::defaults());
    t.id = "sample";
    return t;
}

TEST(Grid, TauValues) {
    EXPECT_EQ(grid_tau(0), 3.0);
    EXPECT_EQ(grid_tau(kLandfallRow), 0.0);
    EXPECT_EQ(grid_tau(kRowsPerTrack - 1), -1.0);
    EXPECT_EQ(track_csv_columns()[0], "tau_days");
    EXPECT_EQ(track_csv_columns()[15], "surge_10");
}

TEST_F(TrackFiles, RoundTripPreservesValues) {
    const auto t = sample_track();
    // Awkward values survive 17 significant digits.
    auto u = t;
    u.rows[3].surge[0] = 0.1;
    u.rows[4].surge[1] = 1.0 / 3.0;
    u.rows[5].surge[2] = 4.9406564584124654e-324;
    u.rows[6].surge[3] = -0.0;
    save_track_csv(u, dir_ / "sample.csv");
    const auto back = load_track_csv(dir_ / "sample.csv");
    EXPECT_EQ(back.id, "sample");
    ASSERT_EQ(back.rows.size(), kRowsPerTrack);
    for (std::size_t r = 0; r < kRowsPerTrack; ++r) {
        EXPECT_EQ(back.rows[r].inputs.as_array(), u.rows[r].inputs.as_array());
        EXPECT_EQ(back.rows[r].surge, u.rows[r].surge);
    }
    save_track_csv(back, dir_ / "again.csv");
    EXPECT_EQ(read_text(dir_ / "sample.csv"), read_text(dir_ / "again.csv"));
}

TEST_F(TrackFiles, CrLfAndPlusSignsAreAccepted) {
    save_track_csv(sample_track(), dir_ / "a.csv");
    std::string text = read_text(dir_ / "a.csv");
    std::string crlf;
    for (char c : text) {
        if (c == '\n') crlf += '\r';
        crlf += c;
    }
    const auto p = write_text("crlf.csv", crlf);
    EXPECT_EQ(load_track_csv(p).rows.size(), kRowsPerTrack);
}

TEST_F(TrackFiles, ShortTrackNamesRowCount) {
    save_track_csv(sample_track(), dir_ / "a.csv");
    std::string text = read_text(dir_ / "a.csv");
    text.erase(text.rfind('\n', text.size() - 2) + 1);
    const auto e = load_error(text);
    EXPECT_EQ(e.kind(), TrackErrorKind::row_count);
    EXPECT_NE(std::string(e.what()).find("192"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("193"), std::string::npos);
}

TEST_F(TrackFiles, NonFiniteValueNamesRowAndColumn) {
    auto t = sample_track();
    save_track_csv(t, dir_ / "a.csv");
    std::string text = read_text(dir_ / "a.csv");
    // Replace the last field on data row 3 with nan.
    std::size_t line_start = 0;
    for (int i = 0; i < 3; ++i) line_start = text.find('\n', line_start) + 1;
    const auto line_end = text.find('\n', line_start);
    const auto last_comma = text.rfind(',', line_end);
    text.replace(last_comma + 1, line_end - last_comma - 1, "nan");
    const auto e = load_error(text);
    EXPECT_EQ(e.kind(), TrackErrorKind::non_finite);
    EXPECT_EQ(e.row(), 2);
    EXPECT_EQ(e.column(), 15);
    EXPECT_NE(std::string(e.what()).find("surge_10"), std::string::npos);
}

TEST_F(TrackFiles, StructuralErrors) {
    EXPECT_EQ(load_error("").kind(), TrackErrorKind::header);
    EXPECT_EQ(load_error("tau_days,lon_deg\n").kind(), TrackErrorKind::column_count);

    save_track_csv(sample_track(), dir_ / "a.csv");
    const std::string good = read_text(dir_ / "a.csv");

    std::string renamed = good;
    renamed.replace(0, 8, "tau_hour");
    EXPECT_EQ(load_error(renamed).kind(), TrackErrorKind::header);

    std::string garbled = good;
    const auto row1 = garbled.find('\n') + 1;
    garbled.replace(row1, garbled.find(',', row1) - row1, "abc");
    const auto pe = load_error(garbled);
    EXPECT_EQ(pe.kind(), TrackErrorKind::parse);
    EXPECT_EQ(pe.row(), 0);
    EXPECT_EQ(pe.column(), 0);

    std::string extra = good;
    extra.insert(extra.find('\n', row1), ",1.0");
    EXPECT_EQ(load_error(extra).kind(), TrackErrorKind::column_count);

    std::string off_grid = good;
    off_grid.replace(row1, off_grid.find(',', row1) - row1, "2.9");
    EXPECT_EQ(load_error(off_grid).kind(), TrackErrorKind::tau_grid);
}

TEST(TrackValidate, RangeChecks) {
    auto t = sample_track();
    EXPECT_NO_THROW(t.validate());
    t.rows[10].inputs.rmax = 0.0;
    try {
        t.validate();
        FAIL();
    } catch (const TrackValidationError& e) {
        EXPECT_EQ(e.kind(), TrackErrorKind::out_of_range);
        EXPECT_EQ(e.row(), 10);
        EXPECT_EQ(e.column(), 3);
    }
    t = sample_track();
    t.rows[0].inputs.vmax = -1.0;
    EXPECT_THROW(t.validate(), TrackValidationError);
}

TEST_F(TrackFiles, MissingFileIsIoError) {
    try {
        load_track_csv(dir_ / "missing.csv");
        FAIL();
    } catch (const TrackValidationError& e) {
        EXPECT_EQ(e.kind(), TrackErrorKind::io);
    }
}

TEST(Split, Sizes) {
    const auto s = split_sizes(324);
    EXPECT_EQ(s.training, 228u);
    EXPECT_EQ(s.validation, 48u);
    EXPECT_EQ(s.testing, 48u);
    const auto small = split_sizes(10);
    EXPECT_EQ(small.training, 8u);
    EXPECT_EQ(small.validation, 1u);
    EXPECT_EQ(small.testing, 1u);
    const auto tiny = split_sizes(3);
    EXPECT_EQ(tiny.training + tiny.validation + tiny.testing, 3u);
    EXPECT_THROW(split_sizes(2), InvalidArgument);
}

TEST(Split, DisjointCoveringAndSeeded) {
    const auto tracks = generate_corpus(40, 3, OracleParams::defaults());
    const auto a = split_dataset(tracks, 9);
    const auto b = split_dataset(tracks, 9);
    const auto c = split_dataset(tracks, 10);
    std::set<std::string> ids;
    for (const auto* part : {&a.training, &a.validation, &a.testing}) {
        for (const auto& t : *part) EXPECT_TRUE(ids.insert(t.id).second) << t.id;
    }
    EXPECT_EQ(ids.size(), 40u);
    auto names = [](const std::vector<StormTrack>& v) {
        std::vector<std::string> out;
        for (const auto& t : v) out.push_back(t.id);
        return out;
    };
    EXPECT_EQ(names(a.testing), names(b.testing));
    EXPECT_NE(names(a.training), names(c.training));
}

TEST_F(TrackFiles, ManifestRoundTripAndCorpus) {
    const auto tracks = generate_corpus(10, 1, OracleParams::defaults());
    std::vector<ManifestEntry> entries;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        save_track_csv(tracks[i], dir_ / (tracks[i].id + ".csv"));
        const auto role = i < 8 ? SplitRole::training : i == 8 ? SplitRole::validation : SplitRole::testing;
        entries.push_back({tracks[i].id + ".csv", role});
    }
    write_manifest(entries, dir_ / kManifestFile);
    const auto back = read_manifest(dir_ / kManifestFile);
    ASSERT_EQ(back.size(), entries.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].file, entries[i].file);
        EXPECT_EQ(back[i].role, entries[i].role);
    }
    EXPECT_EQ(read_text(dir_ / kManifestFile).substr(0, 11), "file,split\n");
    const auto data = load_corpus(dir_);
    EXPECT_EQ(data.training.size(), 8u);
    EXPECT_EQ(data.validation.size(), 1u);
    EXPECT_EQ(data.testing.size(), 1u);
    EXPECT_EQ(data.testing[0].id, tracks[9].id);
}

TEST_F(TrackFiles, ManifestErrors) {
    EXPECT_THROW(read_manifest(dir_ / "none.csv"), std::runtime_error);
    EXPECT_THROW(read_manifest(write_text("m1.csv", "name,role\na.csv,train\n")), std::runtime_error);
    EXPECT_THROW(read_manifest(write_text("m2.csv", "file,split\na.csv,holdout\n")),
                 std::runtime_error);
}

TEST(LandfallWindow, DefaultHalfDay) {
    const auto w = landfall_window(kDefaultLandfallHalfWidth);
    EXPECT_EQ(w.first, 120u);
    EXPECT_EQ(w.last, 168u);
    EXPECT_EQ(w.size(), 49u);
    for (std::size_t r = w.first; r <= w.last; ++r) EXPECT_LE(std::abs(grid_tau(r)), 0.5);
    EXPECT_GT(std::abs(grid_tau(w.first - 1)), 0.5);
    EXPECT_GT(std::abs(grid_tau(w.last + 1)), 0.5);
}

TEST(LandfallWindow, ClipsToTrack) {
    const auto w = landfall_window(1.0);
    EXPECT_EQ(w.first, 96u);
    EXPECT_EQ(w.last, 192u);
    EXPECT_THROW(landfall_window(0.0), InvalidArgument);
    EXPECT_THROW(landfall_window(1.5), InvalidArgument);
}

}  // namespace
}  // namespace surgenet
