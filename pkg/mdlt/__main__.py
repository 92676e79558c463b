from mdlt.main import main

main()
