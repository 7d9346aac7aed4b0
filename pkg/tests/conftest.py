def pytest_terminal_summary(terminalreporter):
    import _acceptance_report

    if _acceptance_report.lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_report.lines:
            terminalreporter.write_line(line)
