def pytest_terminal_summary(terminalreporter):
    from test_acceptance import SUMMARY

    if SUMMARY:
        terminalreporter.section("acceptance criteria")
        for number in sorted(SUMMARY):
            terminalreporter.write_line(SUMMARY[number])
