from natmap.main import main

main()
