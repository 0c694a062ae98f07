#pragma once

// Little-endian binary helpers shared by the file formats.

#include <Eigen/Dense>

#include <bit>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace gkdv::detail {

static_assert(std::endian::native == std::endian::little, "binary files are written little-endian");

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary)
    {
        if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    template <typename T>
    void put(T v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
    void put(const Eigen::VectorXd& v) { out_.write(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double)); }
    void put_bytes(const char* p, std::size_t n) { out_.write(p, n); }
    void finish()
    {
        out_.flush();
        if (!out_) throw std::runtime_error("write failed");
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), name_(path.string())
    {
        if (!in_) throw std::runtime_error("cannot open " + name_);
    }
    template <typename T>
    T get()
    {
        T v;
        read(reinterpret_cast<char*>(&v), sizeof v);
        return v;
    }
    Eigen::VectorXd get_vector(int n)
    {
        if (n <= 0 || n > (1 << 26)) throw std::runtime_error(name_ + ": implausible array length");
        Eigen::VectorXd v(n);
        read(reinterpret_cast<char*>(v.data()), n * sizeof(double));
        return v;
    }
    void read(char* p, std::size_t n)
    {
        in_.read(p, n);
        if (in_.gcount() != static_cast<std::streamsize>(n)) throw std::runtime_error(name_ + ": truncated file");
    }

private:
    std::ifstream in_;
    std::string name_;
};

}  // namespace gkdv::detail
