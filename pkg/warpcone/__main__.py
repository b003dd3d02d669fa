from warpcone.cli import main

main()
