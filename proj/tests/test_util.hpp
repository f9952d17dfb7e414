#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>

#include "hkg/corpus.hpp"

// Unique scratch directory, removed on scope exit.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<unsigned> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("hkg-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(TEST_DATA_DIR) / name;
}

inline hkg::Haiku mk_haiku(std::string l1, std::string l2, std::string l3,
                           hkg::Source source = hkg::Source::human) {
    hkg::Haiku h;
    h.lines = {std::move(l1), std::move(l2), std::move(l3)};
    h.source = source;
    return h;
}
