def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for criterion in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[criterion])
