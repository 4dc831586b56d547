# CLI handler groups, one register_*_handlers per subcommand
