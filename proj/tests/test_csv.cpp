#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "cldrf/csv.hpp"
#include "cldrf/rng.hpp"
#include "cldrf/simulation.hpp"

using namespace cldrf;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("cldrf_csv_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("dataset CSV round-trips bit-exactly") {
    TempDir tmp;
    const auto labeled = generate({Scenario::LinearC4, 120, 2718});
    const auto file = tmp.path / "data.csv";
    write_dataset_csv(file, labeled.data);
    const Dataset back = read_dataset_csv(file);
    REQUIRE(back.n() == labeled.data.n());
    REQUIRE(back.p() == labeled.data.p());
    CHECK((back.y.array() == labeled.data.y.array()).all());
    CHECK((back.t.array() == labeled.data.t.array()).all());
    CHECK((back.X.array() == labeled.data.X.array()).all());
}

TEST_CASE("format_double survives awkward values") {
    for (double v : {1.0 / 3.0, -0.0, 1e-300, 123456789.123456789, 2e300}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_CASE("p = 0 datasets serialize with a two-column header") {
    TempDir tmp;
    const auto labeled = generate({Scenario::RandomC4, 40, 11});
    const auto file = tmp.path / "p0.csv";
    write_dataset_csv(file, labeled.data);
    std::ifstream in(file);
    std::string header;
    std::getline(in, header);
    CHECK(header == "y,t");
    const Dataset back = read_dataset_csv(file);
    CHECK(back.p() == 0);
    CHECK(back.n() == 40);
}

TEST_CASE("malformed rows are reported with their line number") {
    TempDir tmp;
    const auto file = tmp.path / "bad.csv";
    {
        std::ofstream out(file);
        out << "y,t,x1\n1,2,3\n4,oops,6\n";
    }
    try {
        read_dataset_csv(file);
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.row() == 3);
        CHECK(std::string(e.what()).find("3") != std::string::npos);
    }

    const auto ragged = tmp.path / "ragged.csv";
    {
        std::ofstream out(ragged);
        out << "y,t\n1,2\n3\n";
    }
    CHECK_THROWS_AS(read_dataset_csv(ragged), CsvError);
    CHECK_THROWS_AS(read_dataset_csv(tmp.path / "missing.csv"), CsvError);
}

TEST_CASE("label CSV round-trips and reads the last column") {
    TempDir tmp;
    const std::vector<int> labels = {1, 2, 2, 3, 1};
    const auto file = tmp.path / "labels.csv";
    write_labels_csv(file, labels, "cluster");
    CHECK(read_labels_csv(file) == labels);
}
