// Writes the synthetic sample netlists into a directory.
//
//   qkmap_gen <dir>

#include <fstream>
#include <iostream>
#include <string>

#include "qkmap/generators.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: qkmap_gen <output-dir>\n";
    return 2;
  }
  const std::string dir = argv[1];
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir + "/" + name);
    if (!out) {
      std::cerr << "cannot write " << dir << "/" << name << '\n';
      return false;
    }
    out << text;
    return true;
  };
  bool ok = write("toffoli.qasm", qkmap::gen::toffoli_netlist()) &&
            write("walk.qasm", qkmap::gen::walk_netlist({})) &&
            write("phase_estimation.qasm", qkmap::gen::phase_estimation_netlist(6)) &&
            write("chains.qasm", qkmap::gen::parallel_chains_netlist(4, 8));
  return ok ? 0 : 1;
}
