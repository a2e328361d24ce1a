// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all
// pass. Usage: acceptance [all|oned|twod|bounds|divergence|properties] [--quiet]

#include <aniso.hpp>
#include <aniso/acceptance.hpp>

#include <iostream>
#include <string>

int main(int argc, char **argv)
{
    std::string suite = "all";
    bool verbose = true;
    for (int i = 1; i < argc; ++i)
    {
        const std::string arg = argv[i];
        if (arg == "--quiet")
            verbose = false;
        else
            suite = arg;
    }
    try
    {
        const bool ok = aniso::acceptance::run_suite(aniso::acceptance::suite_criteria(suite), std::cout, verbose);
        return ok ? 0 : 1;
    }
    catch (const std::exception &e)
    {
        std::cerr << "acceptance: " << e.what() << "\n";
        return 2;
    }
}
